import math

import numpy as np
import pytest

from mixedlp.errors import HypothesisError
from mixedlp.exponent import INF, Exponent, Grid
from mixedlp.gridfn import FunctionSequence, indicator
from mixedlp.mixed import MixedSpaceSpec, mixed_norms
from mixedlp.probes import (
    convexity_modulus_probe,
    counterexample_suite,
    exceedance_measure,
    geometric_t_grid,
    measure_convergence_probe,
    sample_unit_pairs,
    smoothness_quotient_probe,
    witness_pair,
)
from mixedlp.sampling import random_sequence, random_spec

GRID = Grid(-1, 3, 16)


def hilbert(grid=GRID):
    two = Exponent.constant(grid, 2)
    return MixedSpaceSpec(two, two)


def seq(grid, *fns):
    return FunctionSequence(grid, tuple(fns))


class TestConvexity:
    def test_unit_normalization(self):
        spec = random_spec(GRID, np.random.default_rng(0), "q<=p")
        pairs = sample_unit_pairs(spec, 20, seed=3)
        np.testing.assert_allclose(mixed_norms(pairs.f, spec, 1e-13).value, 1, rtol=1e-12)
        np.testing.assert_allclose(mixed_norms(pairs.g, spec, 1e-13).value, 1, rtol=1e-12)

    def test_hilbert_modulus(self):
        delta, report = convexity_modulus_probe(hilbert(), 1.0, 400, seed=11)
        exact = 1 - math.sqrt(1 - 0.25)
        assert 0.05 <= delta <= exact + 2e-3
        assert report.summary["hilbert_modulus"] == pytest.approx(exact)
        assert report.passed

    def test_seed_reproducible(self):
        a = convexity_modulus_probe(hilbert(), 0.5, 50, seed=4)[1].to_dict()
        b = convexity_modulus_probe(hilbert(), 0.5, 50, seed=4)[1].to_dict()
        assert a == b

    def test_equal_pair_filtered(self):
        chi = indicator(GRID, 0, 1)
        F = seq(GRID, chi)
        delta, report = convexity_modulus_probe(hilbert(), 0.1, 1, 0, witnesses=[("same", F, F)])
        row = [r for r in report.rows if r["source"] == "witness"][0]
        assert row["midpoint_norm"] == pytest.approx(1.0, abs=1e-12)
        assert row["separation"] == 0 and not row["kept"]

    def test_nothing_kept(self):
        delta, report = convexity_modulus_probe(hilbert(), 2.0, 3, 0)
        assert math.isnan(delta) and report.summary["kept"] == 0

    @pytest.mark.parametrize("case, q, sep", [("l1", 1.0, 2.0), ("linf", INF, 1.0)])
    def test_witness_certifies_zero(self, case, q, sep):
        spec = MixedSpaceSpec(Exponent.piecewise(GRID, [1], [1.5, 3]), Exponent.constant(GRID, q))
        f, g = witness_pair(case, GRID, 4)
        delta, report = convexity_modulus_probe(spec, 1.0, 10, 0, witnesses=[(case, f, g)])
        assert delta == 0.0 and report.summary["delta_hat_witness"] == 0.0
        row = [r for r in report.rows if r["source"] == "witness"][0]
        assert row["separation"] == pytest.approx(sep, abs=1e-10)

    def test_strict_convexity_flag(self):
        spec = random_spec(GRID, np.random.default_rng(2), "q-constant")
        _, report = convexity_modulus_probe(spec, 0.1, 100, 9)
        assert report.parameters["strict_check"]
        assert report.passed
        for r in report.rows:
            if r["separation"] >= 0.1:
                assert r["sum_norm"] <= 2 - 1e-8

    def test_epsilon_range(self):
        with pytest.raises(ValueError):
            convexity_modulus_probe(hilbert(), 0.0, 1, 0)


class TestCounterexamples:
    @pytest.mark.parametrize("N", [2, 5])
    @pytest.mark.parametrize("values", [[2, 2], [1.5, 3]])
    def test_values(self, N, values):
        report = counterexample_suite(Exponent.piecewise(GRID, [1], values), N)
        assert report.passed, report.failures
        assert report.summary["max_error"] <= 1e-10

    def test_needs_two_members(self):
        with pytest.raises(ValueError):
            witness_pair("l1", GRID, 1)


class TestSmoothness:
    def test_collinear(self):
        F = seq(GRID, indicator(GRID, 0, 1, 3.0))
        report = smoothness_quotient_probe(hilbert(), F, F * (1 / 3), [-0.5, -0.25, 0.25, 0.5, 2.0])
        assert all(r["phi"] == pytest.approx(1.0, abs=1e-9) for r in report.rows)

    def test_opposite(self):
        F = seq(GRID, indicator(GRID, 0, 1))
        report = smoothness_quotient_probe(hilbert(), F, -F, [0.125, 0.25, 0.5, 0.75])
        assert all(r["phi"] == pytest.approx(-1.0, abs=1e-9) for r in report.rows)

    def test_hilbert_closed_form(self):
        f = seq(GRID, indicator(GRID, 0, 1))
        g = seq(GRID, indicator(GRID, 1, 2))
        report = smoothness_quotient_probe(
            hilbert(), f, g, geometric_t_grid(), reference=lambda t: (math.sqrt(1 + t * t) - 1) / t)
        assert report.passed
        half = [r for r in report.rows if r["t"] == 0.5][0]
        assert half["phi"] == pytest.approx((math.sqrt(1.25) - 1) / 0.5, abs=1e-9)
        assert half["phi"] == pytest.approx(0.2361, abs=1e-4)

    @pytest.mark.parametrize("seed", range(4))
    def test_random_monotone(self, seed):
        rng = np.random.default_rng(seed)
        spec = random_spec(GRID, rng, "conjugate")
        report = smoothness_quotient_probe(spec, random_sequence(GRID, rng), random_sequence(GRID, rng),
                                           geometric_t_grid())
        assert report.passed, report.failures

    def test_grid(self):
        t = geometric_t_grid(3)
        assert t == [-0.5, -0.25, -0.125, 0.125, 0.25, 0.5]

    def test_rejects_zero_t(self):
        F = seq(GRID, indicator(GRID, 0, 1))
        with pytest.raises(ValueError):
            smoothness_quotient_probe(hilbert(), F, F, [0.0, 1.0])


class TestMeasure:
    def test_constant_bump(self):
        F = seq(GRID, indicator(GRID, 0, 1))
        report = measure_convergence_probe(hilbert(), F, F, [0.1], range(1, 16), 1)
        measures = {r["n"]: r["measure"] for r in report.rows}
        assert measures[10] == 1.0 and measures[11] == 0.0
        assert report.passed and report.summary["all_reach_zero"]

    def test_shrinking_level(self):
        F = seq(GRID, indicator(GRID, 0, 1))
        for n in (2, 4, 8):
            lam = 1 / (2 * n)
            report = measure_convergence_probe(hilbert(), F, F, [lam], [n], 1)
            row = report.rows[0]
            assert row["measure"] == 1.0
            assert row["bound"] == pytest.approx(4 * n)
            assert row["pass"]

    def test_equal_inputs_zero_measure(self):
        F = seq(GRID, indicator(GRID, 0, 1))
        assert exceedance_measure(F - F, 1, 1e-9) == 0

    def test_rescales_large_direction(self):
        F = seq(GRID, indicator(GRID, 0, 1))
        report = measure_convergence_probe(hilbert(), F, F * 10, [0.5], [1, 2], 1)
        assert report.parameters["direction_scale"] == pytest.approx(0.1)
        assert all(r["diff_norm"] <= 1 + 1e-12 for r in report.rows)

    def test_requires_finite_p(self):
        spec = MixedSpaceSpec(Exponent.piecewise(GRID, [1], [2, INF]), Exponent.constant(GRID, 2))
        F = seq(GRID, indicator(GRID, 0, 1))
        with pytest.raises(HypothesisError):
            measure_convergence_probe(spec, F, F, [0.5], [1], 1)

    @pytest.mark.parametrize("seed", range(3))
    def test_random_suite(self, seed):
        rng = np.random.default_rng(seed)
        spec = random_spec(GRID, rng, "q<=p")
        F, H = random_sequence(GRID, rng), random_sequence(GRID, rng)
        report = measure_convergence_probe(spec, F, H, [0.1, 0.5, 0.9], [2**k for k in range(8)], [1, 2, 8])
        assert report.passed, report.failures[:3]
        assert report.summary["all_reach_zero"]
