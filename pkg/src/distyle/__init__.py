"""Extinction probabilities of a two-morph flower population.

A nearest-neighbour random walk on the positive quadrant models the counts
of the two floral morphs; hitting an axis means the mating system dies out.
The package computes the extinction probabilities p_{i,j} three independent
ways and cross-checks them:

* :mod:`distyle.montecarlo`      path simulation with confidence intervals,
* :mod:`distyle.grid`            truncated recurrence with asymptotic closure,
* :mod:`distyle.genfunc`         characteristic-curve quadrature for the
                                 generating function,

with :mod:`distyle.harness` tying them into reproducible experiments.
"""

from .asymptotics import ExpansionOrder, asymptotic_p1j, asymptotic_pij, closure_value
from .characteristics import (
    CharacteristicPath,
    critical_times,
    eval_path,
    integrating_factor,
    make_path,
    reaction_coeff,
    transport_velocity,
)
from .genfunc import GenFuncQuery, eval_by_quadrature, eval_from_grid, query_from_grid
from .grid import (
    GridSolution,
    Method,
    SolveOptions,
    apply_kernel,
    assemble_system,
    column_recursion_check,
    solve_grid,
)
from .harness import ExperimentSpec, compare, fit_log_slope, run_experiment
from .model import ModelParams, State, extinction_bounds, step_distribution
from .montecarlo import McConfig, estimate, estimate_cells, estimate_lattice, simulate_path

__version__ = "0.1.0"

__all__ = [
    "CharacteristicPath",
    "ExpansionOrder",
    "ExperimentSpec",
    "GenFuncQuery",
    "GridSolution",
    "McConfig",
    "Method",
    "ModelParams",
    "SolveOptions",
    "State",
    "apply_kernel",
    "assemble_system",
    "asymptotic_p1j",
    "asymptotic_pij",
    "closure_value",
    "column_recursion_check",
    "compare",
    "critical_times",
    "estimate",
    "estimate_cells",
    "estimate_lattice",
    "eval_by_quadrature",
    "eval_from_grid",
    "eval_path",
    "extinction_bounds",
    "fit_log_slope",
    "integrating_factor",
    "make_path",
    "query_from_grid",
    "reaction_coeff",
    "run_experiment",
    "simulate_path",
    "solve_grid",
    "step_distribution",
    "transport_velocity",
]
