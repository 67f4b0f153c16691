import io

import numpy as np
import pytest

from distyle.grid import (
    ConvergenceError,
    Method,
    SolveOptions,
    apply_kernel,
    assemble_system,
    closure_arrays,
    column_recursion_check,
    padded_field,
    solve_grid,
    write_grid_csv,
)
from distyle.model import extinction_bounds


class TestKernel:
    def test_constant_field_is_fixed(self, params3):
        field = padded_field(30, np.ones(30), np.ones(30), interior=1.0)
        for i, j in [(1, 1), (1, 30), (30, 1), (7, 19), (30, 30)]:
            assert apply_kernel(params3, field, i, j) == pytest.approx(1.0, abs=1e-15)

    def test_zero_interior_at_corner(self, params3):
        field = padded_field(5, np.zeros(5), np.zeros(5), interior=0.0)
        # only the two absorbing-boundary moves contribute d/(r+d)
        assert apply_kernel(params3, field, 1, 1) == pytest.approx(0.4, rel=1e-15)

    def test_out_of_range_rejected(self, params3):
        field = padded_field(5, np.zeros(5), np.zeros(5))
        with pytest.raises(IndexError):
            apply_kernel(params3, field, 6, 2)

    def test_padded_corners_are_nan(self):
        field = padded_field(4, np.ones(4), np.ones(4))
        assert np.isnan(field[0, 0])
        assert np.isnan(field[5, 5])
        assert field.shape == (6, 6)


class TestAssembly:
    def test_row_sums_vanish_with_unit_closure(self, params3):
        n = 7
        ones = np.ones(n)
        mat, rhs = assemble_system(params3, n, ones, ones)
        defect = mat @ np.ones(n * n) - rhs
        assert np.max(np.abs(defect)) < 1e-14

    def test_single_cell_system(self, params3):
        up, right, _ = closure_arrays(params3, 1, "asymptotic")
        mat, rhs = assemble_system(params3, 1, up, right)
        assert mat.shape == (1, 1) and rhs.shape == (1,)
        assert mat.toarray()[0, 0] == -1.0

    def test_single_cell_solve_is_kernel_fixed_point(self, params3):
        sol = solve_grid(params3, 1)
        field = padded_field(1, sol.closure_up, sol.closure_right)
        field[1, 1] = sol.p(1, 1)
        assert apply_kernel(params3, field, 1, 1) == pytest.approx(sol.p(1, 1), abs=1e-14)


class TestSolvers:
    def test_methods_agree(self, params3):
        sweep = solve_grid(params3, 20, SolveOptions(method=Method.ITERATIVE_SWEEP))
        direct = solve_grid(params3, 20, SolveOptions(method=Method.DIRECT_BANDED))
        vi = solve_grid(params3, 20, SolveOptions(method=Method.VALUE_ITERATION))
        assert np.max(np.abs(sweep.values - direct.values)) < 1e-10
        assert np.max(np.abs(vi.values - direct.values)) < 1e-10

    def test_symmetry(self, params3):
        sol = solve_grid(params3, 20)
        assert np.max(np.abs(sol.values - sol.values.T)) < 1e-12

    def test_unit_closure_gives_constant_solution(self, params3):
        sol = solve_grid(
            params3, 12, SolveOptions(method=Method.DIRECT_BANDED), closure="ones"
        )
        assert np.max(np.abs(sol.values - 1.0)) < 1e-12

    def test_closure_ordering_is_monotone(self, params3):
        # the system matrix is monotone, so raising the closure raises the
        # solution; the lower-bound field itself sits below every variant
        # because the axes carry the value 1 >= (d/r)^k
        opts = SolveOptions(method=Method.DIRECT_BANDED)
        low = solve_grid(params3, 15, opts, closure="bounds-lower")
        mid = solve_grid(params3, 15, opts)
        high = solve_grid(params3, 15, opts, closure="bounds-upper")
        i = np.arange(1, 16)
        floor = params3.ratio ** np.add.outer(i, i)
        assert np.min(low.values - floor) > -1e-12
        assert np.min(mid.values - low.values) > -1e-12
        assert np.min(high.values - mid.values) > -1e-12

    def test_explicit_closure_arrays(self, params3):
        up, right, _ = closure_arrays(params3, 10, "asymptotic")
        sol = solve_grid(params3, 10, closure=(up, right))
        ref = solve_grid(params3, 10)
        assert np.array_equal(sol.values, ref.values)

    def test_unknown_closure_rejected(self, params3):
        with pytest.raises(ValueError):
            solve_grid(params3, 5, closure="midpoint")

    def test_direct_refuses_huge_grids(self, params3):
        with pytest.raises(ValueError):
            solve_grid(params3, 121, SolveOptions(method=Method.DIRECT_BANDED))

    def test_iteration_cap_raises(self, params3):
        with pytest.raises(ConvergenceError) as info:
            solve_grid(params3, 20, SolveOptions(max_iter=3))
        assert info.value.residual > 0.0

    def test_options_validated(self):
        with pytest.raises(ValueError):
            SolveOptions(tol=0.0)
        with pytest.raises(ValueError):
            SolveOptions(max_iter=0)

    def test_residual_reported_small(self, grid50):
        assert grid50.residual < 1e-11
        assert grid50.iterations > 0


class TestSolutionAccess:
    def test_boundary_and_interior(self, grid50, params3):
        assert grid50.p(0, 17) == 1.0
        assert grid50.p(17, 0) == 1.0
        assert grid50.p(3, 4) == grid50.values[2, 3]
        lo, hi = extinction_bounds(params3, 3, 4)
        assert lo <= grid50.p(3, 4) <= hi

    def test_outside_box_rejected(self, grid50):
        with pytest.raises(IndexError):
            grid50.p(51, 1)
        with pytest.raises(IndexError):
            grid50.p(1, -2)

    def test_column_recursion_defect(self, params3):
        sol = solve_grid(params3, 10, SolveOptions(method=Method.DIRECT_BANDED))
        assert column_recursion_check(sol) < 1e-12


class TestCsv:
    def test_layout(self, params3):
        sol = solve_grid(params3, 2)
        buf = io.StringIO()
        write_grid_csv(sol, buf)
        lines = buf.getvalue().split("\n")
        assert lines[0] == "i,j,p"
        assert lines[1].startswith("1,1,0.7135802469")
        assert len(lines) == 6 and lines[5] == ""
        assert "\r" not in buf.getvalue()
