import pytest

from distyle.genfunc import (
    GenFuncQuery,
    QuadratureError,
    default_n_terms,
    eval_by_quadrature,
    eval_from_grid,
    query_from_grid,
)


class TestQuery:
    def test_validation(self):
        with pytest.raises(ValueError):
            GenFuncQuery(x0=0.0, y0=0.5, row1=(0.7,), n_terms=1)
        with pytest.raises(ValueError):
            GenFuncQuery(x0=0.5, y0=1.0, row1=(0.7,), n_terms=1)
        with pytest.raises(ValueError):
            GenFuncQuery(x0=0.5, y0=0.5, row1=(0.7,), n_terms=2)
        with pytest.raises(ValueError):
            GenFuncQuery(x0=0.5, y0=0.5, row1=(0.7,), n_terms=1, tol=0.0)

    def test_default_n_terms(self):
        # max(x0,y0)^(n+1) < tol at the returned n
        n = default_n_terms(0.5, 0.3, 1e-8)
        assert 0.5 ** (n + 1) < 1e-8 <= 0.5**n
        assert default_n_terms(0.99, 0.99, 1e-12, cap=150) == 150

    def test_query_from_grid_pulls_first_column(self, grid50, params3):
        q = query_from_grid(grid50, 0.4, 0.2, tol=1e-8)
        assert q.row1[0] == grid50.values[0, 0]
        assert q.row1[2] == grid50.values[2, 0]
        assert q.n_terms == default_n_terms(0.4, 0.2, 1e-8)

    def test_error_carries_diagnostics(self):
        err = QuadratureError("no luck", estimate=0.25, error_bound=3e-4)
        assert err.estimate == 0.25
        assert err.error_bound == 3e-4
        assert "no luck" in str(err)


class TestSeriesFromGrid:
    def test_tail_bound_is_negligible_inside(self, grid50):
        val = eval_from_grid(grid50, 0.3, 0.3)
        assert 0.0 < val.value < 1.0
        assert val.tail_bound < 1e-20

    def test_tail_bound_grows_toward_corner(self, grid50):
        near = eval_from_grid(grid50, 0.9, 0.9)
        far = eval_from_grid(grid50, 0.2, 0.2)
        assert near.tail_bound > far.tail_bound

    def test_rejects_outside_square(self, grid50):
        with pytest.raises(ValueError):
            eval_from_grid(grid50, 1.0, 0.5)


class TestQuadrature:
    def test_matches_series(self, params3, grid50):
        for x0, y0 in [(0.3, 0.3), (0.1, 0.5), (0.45, 0.2)]:
            q = query_from_grid(grid50, x0, y0, tol=1e-8)
            quad = eval_by_quadrature(params3, q)
            series = eval_from_grid(grid50, x0, y0)
            assert quad == pytest.approx(series.value, abs=1e-6 + series.tail_bound)

    def test_symmetric_arguments(self, params3, grid50):
        qa = query_from_grid(grid50, 0.1, 0.5)
        qb = query_from_grid(grid50, 0.5, 0.1)
        assert eval_by_quadrature(params3, qa) == eval_by_quadrature(params3, qb)

    def test_other_rates(self, paramsc, grid100c):
        # near-critical rates stress the expm1 forms in the path evaluation
        q = query_from_grid(grid100c, 0.3, 0.4, tol=1e-8)
        quad = eval_by_quadrature(paramsc, q)
        series = eval_from_grid(grid100c, 0.3, 0.4)
        assert quad == pytest.approx(series.value, abs=2e-3 + series.tail_bound)
