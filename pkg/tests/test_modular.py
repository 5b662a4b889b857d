import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mixedlp.errors import GridMismatchError, SolverError
from mixedlp.exponent import INF, Exponent, Grid
from mixedlp.gridfn import GridFunction, indicator
from mixedlp.modular import bisect_level, lp_norm, luxemburg_norm, luxemburg_rows, modular_value
from mixedlp.sampling import random_exponent, random_function_array
from oracles import lp_oracle

GOLDEN = (1 + math.sqrt(5)) / 2
GRID = Grid(-1, 3, 32)


def random_case(seed):
    rng = np.random.default_rng(seed)
    p = random_exponent(GRID, rng)
    f = GridFunction(GRID, random_function_array(GRID, rng, 1)[0])
    return f, p


class TestModular:
    def test_indicator(self, unit_grid):
        assert modular_value(indicator(unit_grid, 0, 1), Exponent.constant(unit_grid, 2)) == 1

    def test_pure_sup_term(self, unit_grid):
        assert modular_value(indicator(unit_grid, 0, 1, 2.0), Exponent.constant(unit_grid, INF)) == 2

    def test_mixed_regions(self, unit_grid):
        p = Exponent.piecewise(unit_grid, [1], [2, INF])
        assert modular_value(indicator(unit_grid, 0, 2), p) == 2

    def test_rejects_nonpositive_scale(self, unit_grid):
        with pytest.raises(ValueError):
            modular_value(indicator(unit_grid, 0, 1), Exponent.constant(unit_grid, 2), 0.0)

    def test_grid_mismatch(self, unit_grid):
        with pytest.raises(GridMismatchError):
            modular_value(indicator(unit_grid, 0, 1), Exponent.constant(unit_grid.refine(8), 2))

    @given(st.integers(0, 10**6), st.floats(0.05, 20), st.floats(1.01, 3))
    def test_strictly_decreasing(self, seed, lam, factor):
        f, p = random_case(seed)
        assert modular_value(f, p, lam * factor) < modular_value(f, p, lam)


class TestLuxemburg:
    @pytest.mark.parametrize("height, p, expected", [(1, 3, 1.0), (2, 2, 2.0)])
    def test_constant_examples(self, unit_grid, height, p, expected):
        f = indicator(unit_grid, 0, 1, height)
        assert luxemburg_norm(f, Exponent.constant(unit_grid, p)).value == pytest.approx(expected, rel=1e-10)

    def test_golden_ratio(self):
        grid = Grid(0, 2, 4096)
        p = Exponent.piecewise(grid, [1], [2, INF])
        res = luxemburg_norm(indicator(grid, 0, 2), p)
        assert abs(res.value - GOLDEN) <= 1e-8
        assert res.bracket[0] <= GOLDEN <= res.bracket[1] + 1e-15

    def test_two_finite_pieces(self, unit_grid):
        # lam^-2 + lam^-4 = 1 on chi_(0,2) with p = 2 | 4
        p = Exponent.piecewise(unit_grid, [1], [2, 4])
        expected = ((math.sqrt(5) - 1) / 2) ** -0.5
        assert luxemburg_norm(indicator(unit_grid, 0, 2), p).value == pytest.approx(expected, rel=1e-10)
        assert expected == pytest.approx(1.272019649514069, rel=1e-15)

    def test_pure_sup(self, unit_grid):
        f = GridFunction(unit_grid, [0.5, -3.0, 1.0, 0.0])
        assert luxemburg_norm(f, Exponent.constant(unit_grid, INF)).value == pytest.approx(3.0, rel=1e-10)

    def test_zero(self, unit_grid):
        res = luxemburg_norm(GridFunction.zeros(unit_grid), Exponent.constant(unit_grid, 2))
        assert res.value == 0 and res.iterations == 0

    def test_tiny_and_huge_scales(self, unit_grid):
        p = Exponent.piecewise(unit_grid, [1], [1.5, 5])
        f = indicator(unit_grid, 0, 2)
        base = luxemburg_norm(f, p).value
        for c in (1e-150, 1e150):
            assert luxemburg_norm(f * c, p).value == pytest.approx(c * base, rel=1e-9)

    @given(st.integers(0, 10**6))
    def test_constant_exponent_oracle(self, seed):
        rng = np.random.default_rng(seed)
        f = GridFunction(GRID, random_function_array(GRID, rng, 1)[0])
        p = float(rng.uniform(1, 6))
        got = luxemburg_norm(f, Exponent.constant(GRID, p)).value
        assert got == pytest.approx(lp_oracle(f.values, GRID.width, p), rel=1e-8)
        assert lp_norm(f, p) == pytest.approx(got, rel=1e-8)

    @given(st.integers(0, 10**6), st.floats(-1e3, 1e3).filter(lambda c: abs(c) > 1e-3))
    def test_homogeneity(self, seed, c):
        f, p = random_case(seed)
        assert luxemburg_norm(f * c, p).value == pytest.approx(abs(c) * luxemburg_norm(f, p).value, rel=1e-8)

    @given(st.integers(0, 10**6))
    def test_unit_ball_consistency(self, seed):
        f, p = random_case(seed)
        norm = luxemburg_norm(f, p).value
        assert abs(modular_value(f, p, norm) - 1) <= 1e-8

    @given(st.integers(0, 10**6))
    def test_triangle_inequality(self, seed):
        rng = np.random.default_rng(seed)
        p = random_exponent(GRID, rng, low=1.0)
        f, g = (GridFunction(GRID, r) for r in random_function_array(GRID, rng, 2))
        lhs = luxemburg_norm(f + g, p).value
        assert lhs <= luxemburg_norm(f, p).value + luxemburg_norm(g, p).value + 1e-8

    def test_batched_rows_match_single(self):
        rng = np.random.default_rng(3)
        p = random_exponent(GRID, rng)
        rows = random_function_array(GRID, rng, 6)
        rows[2] = 0
        batch = luxemburg_rows(rows, p).value
        single = [luxemburg_norm(GridFunction(GRID, r), p).value for r in rows]
        np.testing.assert_allclose(batch, single, rtol=1e-12)
        assert batch[2] == 0


class TestBisection:
    def test_reports_bracket_on_failure(self):
        with pytest.raises(SolverError) as err:
            bisect_level(lambda s, idx: 1 / s, np.array([1e-3]), rtol=1e-30, max_iter=3)
        lo, hi = err.value.bracket
        assert lo <= 1 <= hi

    def test_stalls_at_float_resolution(self):
        res = bisect_level(lambda s, idx: 1 / s, np.array([3.0]), rtol=1e-30)
        assert res.value[0] == pytest.approx(1.0, rel=1e-15)

    def test_unbracketable(self):
        with pytest.raises(SolverError):
            bisect_level(lambda s, idx: np.full(idx.size, 2.0), np.array([1.0]))
