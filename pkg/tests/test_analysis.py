import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from isingdiv import analysis as an, divergences as dv, exact, graphs
from isingdiv.errors import InputError
from isingdiv.model import pair_marginal_lower_bound, parameter_distance

from conftest import k2_pair, pairs, single_pair


class TestLowerBounds:
    def test_identical(self):
        p = k2_pair(2.0, 2.0)
        assert an.tv_lower_bound(p) == 0
        assert an.f_lower_bound(p, dv.KL).value == 0
        assert an.chi_alpha_lower_bound(p, 2).value == 0

    def test_single_vertex_tv(self):
        p = single_pair(1.0, 0.0)
        b = 1 / (1 + math.e**2)
        assert an.tv_lower_bound(p) == pytest.approx(b * b / 2)
        assert an.tv_lower_bound(p) <= exact.exact_tv(p)

    @pytest.mark.parametrize("kind", [dv.KL, dv.HELLINGER], ids=str)
    def test_f_bound_single_vertex(self, kind):
        p = single_pair(0.0, 0.5)
        assert an.f_lower_bound(p, kind).value <= exact.exact_divergence(p, kind)

    def test_chi_bounds(self):
        p = k2_pair(1.0, 4.0)
        assert an.chi_alpha_lower_bound(p, 2).value <= exact.exact_divergence(p, dv.chi(2))
        assert an.chi_alpha_lower_bound(k2_pair(1.0, 2.0), 1).value == an.tv_lower_bound(k2_pair(1.0, 2.0))

    @given(pairs(n_max=6, scale=1.0))
    def test_all_bounds_hold(self, pair):
        report = an.bounds_report(pair)
        bad = [c.to_dict() for c in report.checks if not c.holds]
        assert not bad

    @given(pairs(n_max=5))
    def test_alpha_one_chi_equals_tv_bound(self, pair):
        assert an.chi_alpha_lower_bound(pair, 1).value == an.tv_lower_bound(pair)


class TestBCoefficient:
    @pytest.mark.parametrize("alpha", [1, 2, 3, 5])
    @pytest.mark.parametrize("b", [0.1, 0.3, 0.5])
    @pytest.mark.parametrize("theta", [1e-3, 1e-2, 1e-1])
    def test_matches_numeric_minimum(self, alpha, b, theta):
        B, _ = an.B_coefficient(alpha, b, theta)
        g_min, _ = an.g_minimum(alpha, b, theta)
        assert abs(B * g_min - 1) <= 1e-9
        assert B <= 0.5

    def test_unit_parameters(self):
        # the minimiser clips to t = 1 here
        B, t = an.B_coefficient(1, 1.0, 1.0)
        assert t == 1.0 and B == pytest.approx(1 / 12)
        assert 1 / an.g_minimum(1, 1.0, 1.0)[0] == pytest.approx(B, rel=1e-9)

    @given(st.integers(1, 6), st.floats(0.01, 0.5), st.floats(1e-4, 1.0))
    def test_closed_form_dominates_any_t(self, alpha, b, theta):
        B, _ = an.B_coefficient(alpha, b, theta)
        for t in (1e-6, 1e-3, 0.1, 0.5, 1.0):
            assert an.B_at(alpha, b, theta, t) <= B * (1 + 1e-12)

    @pytest.mark.parametrize("args", [(0, 0.3, 0.1), (2, 0.0, 0.1), (2, 0.3, 0.0), (2, 1.5, 0.1), (2, 0.3, 2.0)])
    def test_rejects(self, args):
        with pytest.raises(InputError):
            an.B_coefficient(*args)


class TestMomentSandwich:
    @pytest.mark.parametrize("alpha", [1, 2])
    def test_k2(self, alpha):
        c = an.moment_sandwich_check(k2_pair(1.0, 4.0), alpha, theta=1 / 50)
        assert c.applicable and c.holds

    def test_not_applicable_when_close(self):
        c = an.moment_sandwich_check(single_pair(0.0, 0.001), 2)
        assert not c.applicable

    def test_random_n5(self, rng):
        from isingdiv.suites import random_model
        done = 0
        while done < 100:
            edges = graphs.erdos_renyi(5, 0.5, rng)
            pair = type(k2_pair())(random_model(rng, 5, edges), random_model(rng, 5, edges))
            c = an.moment_sandwich_check(pair, 2)
            if c.applicable:
                assert c.holds
                done += 1


class TestSmallDistance:
    def test_variance_and_range(self):
        pair = single_pair(0.0, 0.01)
        assert an.variance_check(pair).holds
        assert an.ratio_range_check(pair).holds

    def test_not_applicable(self):
        assert not an.variance_check(k2_pair(1.0, 4.0)).applicable


class TestHardness:
    C4 = (4, graphs.cycle(4))
    K4 = (4, graphs.complete(4))

    def test_domination_c4(self):
        checks = an.domination_check(*self.C4, 1.0, 2.0, 2)
        assert len(checks) == 2 and all(c.holds for c in checks)

    def test_domination_k4(self):
        checks = an.domination_check(*self.K4, 1 / 3, 2 / 3, 3)
        assert len(checks) == 3 and all(c.holds for c in checks)

    @pytest.mark.parametrize("betas", [(1.0, 1.0), (2.0, 1.0), (0.0, 1.0)])
    def test_rejects_bad_betas(self, betas):
        with pytest.raises(InputError):
            an.domination_check(*self.C4, *betas, 2)
        with pytest.raises(InputError):
            an.hardness_sandwich_check(*self.C4, *betas, 2)

    @pytest.mark.parametrize("graph,bn,bm", [
        (C4, 1.0, 2.0), (K4, 1 / 3, 1.0), ((10, graphs.petersen()), 1 / 3, 2 / 3),
    ])
    def test_sandwich(self, graph, bn, bm):
        rep = an.hardness_sandwich_check(*graph, bn, bm, 2)
        assert rep.holds and 1 <= rep.ratio <= 9


def test_report_serialises():
    import json
    d = an.bounds_report(single_pair(0.0, 0.01)).to_dict()
    json.dumps(d, allow_nan=False)
    assert d["all_hold"]
