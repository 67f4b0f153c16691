"""Allow ``python -m distyle``."""

import sys

from .cli import main

sys.exit(main())
