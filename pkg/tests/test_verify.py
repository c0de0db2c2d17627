import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matchsens.core import OddsOutsideGamma
from matchsens.verify import (
    SimulationConfig,
    majorizes,
    sandwich_check,
    simulate_tails,
    theorem1_check,
    variance_jensen_check,
)

from oracles import binom_tail_exact, pb_tails_enumerate

PAIRS = ((1.0, 0.0), (0.5, 0.25), (0.0, 0.25))


class TestMajorizes:
    @pytest.mark.parametrize(
        "x,y,expected",
        [([0.9, 0.1], [0.5, 0.5], True), ([0.5, 0.5], [0.5, 0.5], True), ([0.6, 0.4], [0.9, 0.1], False)],
    )
    def test_examples(self, x, y, expected):
        assert majorizes(x, y) is expected

    def test_mismatch(self):
        with pytest.raises(ValueError):
            majorizes([0.5, 0.5], [1.0])
        with pytest.raises(ValueError):
            majorizes([0.5, 0.5], [0.5, 0.6])

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=30))
    def test_majorizes_mean_vector(self, p):
        mean = math.fsum(p) / len(p)
        assert majorizes(p, [mean] * len(p))


class TestMeanTailOrdering:
    def test_three_trials(self):
        rep = theorem1_check([0.9, 0.6, 0.3])
        by_a = {r.a: r for r in rep.records}
        assert by_a[3].lhs_tail == pytest.approx(0.162, abs=1e-12)
        assert by_a[3].rhs_tail == pytest.approx(0.216, abs=1e-12)
        assert by_a[3].holds and by_a[3].in_corrected_domain
        # The boundary a = ceil(S * p_bar) = 2 breaks the ordering.
        assert by_a[2].lhs_tail == pytest.approx(0.666, abs=1e-12)
        assert by_a[2].rhs_tail == pytest.approx(0.648, abs=1e-12)
        assert not by_a[2].holds
        assert by_a[2].in_literal_domain and not by_a[2].in_corrected_domain
        assert rep.corrected_start == 3
        assert rep.holds_on_corrected_domain
        assert not rep.holds_on_literal_domain
        assert "3" in rep.domain_note

    def test_equal_probabilities(self):
        rep = theorem1_check([0.5] * 3)
        assert rep.holds_everywhere
        for r in rep.records:
            assert r.lhs_tail == pytest.approx(r.rhs_tail, abs=1e-15)

    def test_empty(self):
        with pytest.raises(ValueError):
            theorem1_check([])

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=12))
    @settings(max_examples=300, deadline=None)
    def test_corrected_domain(self, p):
        rep = theorem1_check(p)
        tails = pb_tails_enumerate(p)
        S = len(p)
        p_bar = math.fsum(p) / S
        for r in rep.records:
            assert r.lhs_tail == pytest.approx(tails[r.a], abs=1e-12)
            if r.a >= math.ceil(S * p_bar) + 1:
                assert tails[r.a] <= binom_tail_exact(S, p_bar, r.a) + 1e-12
        assert rep.holds_on_corrected_domain


def _feasible(p, gamma):
    return all(1 / (1 + gamma) <= x <= gamma / (1 + gamma) for x in p)


class TestSandwich:
    def test_gamma_nine(self):
        rep = sandwich_check([0.9, 0.6, 0.3], 9.0)
        assert rep.holds_everywhere
        tails = pb_tails_enumerate([0.9, 0.6, 0.3])
        for r in rep.records:
            assert r.rhs_tail == pytest.approx(binom_tail_exact(3, 0.9, r.a), abs=1e-14)
            assert r.lower_tail == pytest.approx(binom_tail_exact(3, 0.1, r.a), abs=1e-14)
            assert r.lhs_tail == pytest.approx(tails[r.a], abs=1e-14)

    def test_gamma_one_equality(self):
        rep = sandwich_check([0.5] * 5, 1.0)
        assert rep.holds_everywhere
        for r in rep.records:
            assert r.lower_tail == pytest.approx(r.lhs_tail, abs=1e-14)
            assert r.rhs_tail == pytest.approx(r.lhs_tail, abs=1e-14)

    def test_odds_outside(self):
        with pytest.raises(OddsOutsideGamma) as info:
            sandwich_check([0.9, 0.6, 0.3], 2.0)
        assert info.value.code == "odds_outside_gamma"

    @given(
        log_gamma=st.floats(0.0, 4.0),
        u=st.lists(st.floats(-1.0, 1.0), min_size=1, max_size=12),
    )
    @settings(max_examples=200, deadline=None)
    def test_random_feasible(self, log_gamma, u):
        # Log-odds in [-log Gamma, log Gamma] by construction.
        gamma = math.exp(log_gamma)
        p = [1 / (1 + math.exp(-log_gamma * x)) for x in u]
        if not _feasible(p, gamma):
            return
        assert sandwich_check(p, gamma).holds_everywhere


class TestVarianceJensen:
    @pytest.mark.parametrize(
        "p,lhs,rhs", [([0.9, 0.6, 0.3], 0.54, 0.72), ([0.5, 0.5], 0.5, 0.5), ([1.0, 0.0], 0.0, 0.5)]
    )
    def test_examples(self, p, lhs, rhs):
        got_lhs, got_rhs, holds = variance_jensen_check(p)
        assert got_lhs == pytest.approx(lhs, abs=1e-14)
        assert got_rhs == pytest.approx(rhs, abs=1e-14)
        assert holds

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=50))
    def test_random(self, p):
        assert variance_jensen_check(p)[2]


class TestSimulation:
    def test_probabilities(self):
        cfg = SimulationConfig(PAIRS, math.log(9.0), reps=10)
        expected = [1 / (1 + math.exp(-math.log(9.0) * (u1 - u2))) for u1, u2 in PAIRS]
        np.testing.assert_allclose(cfg.probabilities(), expected, rtol=1e-14)
        np.testing.assert_allclose(cfg.probabilities(), [0.9, 0.633975, 0.366025], atol=1e-6)

    def test_randomization_limit(self):
        cfg = SimulationConfig(PAIRS, 0.0, reps=100_000, seed=3)
        np.testing.assert_array_equal(cfg.probabilities(), [0.5, 0.5, 0.5])
        res = simulate_tails(cfg, [0, 1, 2, 3])
        for a, ex in zip(res.thresholds, res.exact):
            assert ex == pytest.approx(binom_tail_exact(3, 0.5, a), abs=1e-15)
        assert res.agrees(3.5)

    def test_agreement(self):
        cfg = SimulationConfig(PAIRS, math.log(9.0), reps=100_000, seed=42)
        res = simulate_tails(cfg, [0, 1, 2, 3])
        assert res.agrees(3.5)
        np.testing.assert_allclose(res.exact, pb_tails_enumerate(cfg.probabilities()), atol=1e-14)

    def test_deterministic(self):
        cfg = SimulationConfig(PAIRS, math.log(9.0), reps=25_000, seed=7)
        assert simulate_tails(cfg, [1, 2]) == simulate_tails(cfg, [1, 2])

    def test_worker_count_irrelevant(self):
        cfg = SimulationConfig(PAIRS, math.log(9.0), reps=45_001, seed=11)
        assert simulate_tails(cfg, [0, 1, 2, 3], workers=1) == simulate_tails(cfg, [0, 1, 2, 3], workers=4)

    def test_seed_matters(self):
        a = simulate_tails(SimulationConfig(PAIRS, 1.0, reps=20_000, seed=1), [2])
        b = simulate_tails(SimulationConfig(PAIRS, 1.0, reps=20_000, seed=2), [2])
        assert a.empirical != b.empirical

    @pytest.mark.parametrize(
        "kw",
        [
            {"u_pairs": ((1.5, 0.0),), "gamma_log": 1.0},
            {"u_pairs": PAIRS, "gamma_log": -0.1},
            {"u_pairs": PAIRS, "gamma_log": math.inf},
            {"u_pairs": PAIRS, "gamma_log": 1.0, "reps": 0},
        ],
    )
    def test_config_validation(self, kw):
        with pytest.raises(ValueError):
            SimulationConfig(**kw)

    def test_threshold_range(self):
        with pytest.raises(ValueError):
            simulate_tails(SimulationConfig(PAIRS, 1.0, reps=10), [4])
