import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from isingdiv import divergences as dv
from isingdiv.errors import InputError

mpmath.mp.dps = 50

KINDS = dv.catalog()
IDS = [k.spec for k in KINDS]


def _mp_f(kind, x):
    x = mpmath.mpf(x)
    a = kind.alpha
    if kind.name == "chi":
        return abs(x - 1) ** a / 2
    if kind.name == "kl":
        return x * mpmath.log(x) - x + 1
    if kind.name == "renyi":
        return -mpmath.log(x) + x - 1
    if kind.name == "js":
        return (x * mpmath.log(x) - (x + 1) * mpmath.log((x + 1) / 2)) / 2
    if kind.name == "alpha":
        a = mpmath.mpf(a)
        return (x**a - a * x - (1 - a)) / (a * (a - 1))
    return (mpmath.sqrt(x) - 1) ** 2 / 2


class TestParse:
    @pytest.mark.parametrize("spec,name,alpha", [
        ("chi:2", "chi", 2), ("kl", "kl", None), ("renyi", "renyi", None), ("js", "js", None),
        ("alpha:0.5", "alpha", 0.5), ("hellinger2", "hellinger2", None), ("tv", "chi", 1),
    ])
    def test_specs(self, spec, name, alpha):
        k = dv.parse(spec)
        assert (k.name, k.alpha) == (name, alpha)

    @pytest.mark.parametrize("spec", ["chi:0", "chi:1.5", "alpha:1", "alpha:0", "alpha:x", "kl:2", "foo",
                                      "alpha:100"])
    def test_rejects(self, spec):
        with pytest.raises(InputError):
            dv.parse(spec)

    def test_spec_roundtrip(self):
        for k in KINDS:
            assert dv.parse(k.spec) == k


class TestValues:
    @pytest.mark.parametrize("kind", KINDS, ids=IDS)
    def test_zero_at_one(self, kind):
        assert dv.f_value(kind, 1.0) == 0.0

    def test_examples(self):
        assert dv.f_value(dv.chi(2), 3.0) == pytest.approx(2.0)
        assert dv.f_value(dv.alpha_div(2), 2.0) == pytest.approx(0.5)

    def test_domain(self):
        with pytest.raises(InputError):
            dv.f_value(dv.KL, 0.0)

    @pytest.mark.parametrize("kind", KINDS, ids=IDS)
    @pytest.mark.parametrize("x", [1e-6, 0.3, 0.9, 1 - 1e-7, 1 + 1e-9, 1.0001, 1.7, 5.0])
    def test_matches_high_precision(self, kind, x):
        want = float(_mp_f(kind, x))
        assert dv.f_value(kind, x) == pytest.approx(want, rel=1e-12, abs=1e-300)

    @pytest.mark.parametrize("kind", KINDS, ids=IDS)
    @pytest.mark.parametrize("t", [1e-12, -3e-9, 2e-5, -0.04, 0.2])
    def test_shifted_accuracy_near_one(self, kind, t):
        want = float(_mp_f(kind, 1 + mpmath.mpf(t)))  # t is exact in binary, so 1 + t is too at 50 digits
        assert dv.f_shifted(kind, t) == pytest.approx(want, rel=1e-12, abs=1e-300)

    def test_vectorised(self):
        x = np.array([0.5, 1.0, 2.0])
        out = dv.f_value(dv.KL, x)
        assert out.shape == (3,) and out[1] == 0


class TestDerivatives:
    def test_table_examples(self):
        assert dv.f_derivatives(dv.KL, 2.0)[1] == pytest.approx(0.5)
        assert dv.f_derivatives(dv.RENYI, 2.0)[1] == pytest.approx(0.25)

    @pytest.mark.parametrize("kind", KINDS, ids=IDS)
    @pytest.mark.parametrize("x", [0.6, 1.4])
    def test_first_derivative_finite_difference(self, kind, x):
        h = 1e-6
        fd = (dv.f_value(kind, x + h) - dv.f_value(kind, x - h)) / (2 * h)
        assert dv.f_derivatives(kind, x)[0] == pytest.approx(fd, rel=1e-6)

    @pytest.mark.parametrize("kind", [k for k in KINDS if not (k.name == "chi" and k.alpha == 1)],
                             ids=lambda k: k.spec)
    @pytest.mark.parametrize("x", [0.6, 1.4])
    def test_second_derivative_finite_difference(self, kind, x):
        h = 1e-4
        fd = (dv.f_derivatives(kind, x + h)[0] - dv.f_derivatives(kind, x - h)[0]) / (2 * h)
        assert dv.f_derivatives(kind, x)[1] == pytest.approx(fd, rel=1e-6)

    def test_tv_not_differentiable_at_one(self):
        with pytest.raises(InputError):
            dv.f_derivatives(dv.tv(), 1.0)

    @pytest.mark.parametrize("kind", KINDS, ids=IDS)
    def test_sign_structure(self, kind):
        below = np.linspace(0.01, 0.99, 50)
        above = np.linspace(1.01, 10, 50)
        assert np.all(dv.f_derivatives(kind, below)[0] < 0)
        assert np.all(dv.f_derivatives(kind, above)[0] > 0)

    @pytest.mark.parametrize("kind", KINDS, ids=IDS)
    @given(a=st.floats(1e-3, 50), b=st.floats(1e-3, 50))
    def test_convex(self, kind, a, b):
        mid = dv.f_value(kind, (a + b) / 2)
        assert mid <= (dv.f_value(kind, a) + dv.f_value(kind, b)) / 2 * (1 + 1e-12) + 1e-15


class TestWitness:
    def test_table_values(self):
        assert dv.condition_witness(dv.KL).F(1.0) == 6
        assert dv.condition_witness(dv.RENYI).F(1.0) == 18
        assert dv.condition_witness(dv.JS).F(1.0) == 10
        assert dv.condition_witness(dv.chi(2)).F(3.0) == 6
        assert dv.condition_witness(dv.HELLINGER).F(2.0) == pytest.approx(4 * math.sqrt(3))
        for a in (2.0, 0.5, -1.0, 3.5):
            assert dv.condition_witness(dv.alpha_div(a)).F(1.0) == pytest.approx(2 * 4 ** abs(a - 2))

    @pytest.mark.parametrize("kind", [k for k in KINDS if k.name in ("kl", "renyi", "js", "alpha")],
                             ids=lambda k: k.spec)
    def test_F_is_2U_over_L(self, kind):
        w = dv.condition_witness(kind)
        assert w.F(1.0) == pytest.approx(2 * w.U / w.L)

    @pytest.mark.parametrize("kind", [k for k in KINDS if k.name != "chi"], ids=lambda k: k.spec)
    def test_second_derivative_bounds(self, kind):
        w = dv.condition_witness(kind)
        f2 = dv.f_derivatives(kind, np.linspace(0.5, 1.5, 200))[1]
        assert np.all(w.L <= f2 * (1 + 1e-12)) and np.all(f2 <= w.U * (1 + 1e-12))

    @pytest.mark.parametrize("kind", KINDS, ids=IDS)
    @pytest.mark.parametrize("zeta", [1.0, 2.0, 10.0, 8 * (6 + 27) / 0.2**2])
    def test_condition_holds(self, kind, zeta, rng):
        F = dv.condition_witness(kind).F(zeta)
        x = rng.uniform(-1, 1, 200) / (2 * zeta)
        x = x[x != 0]
        assert np.all(dv.condition_ratio(kind, zeta, x) <= F + 1e-9)

    def test_condition_ratio_undefined_at_zero(self):
        with pytest.raises(InputError):
            dv.condition_ratio(dv.chi(2), 2.0, 0.0)
