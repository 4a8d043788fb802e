import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from isingdiv import exact
from isingdiv.errors import CapacityError, InputError
from isingdiv.model import IsingModel, index_from_spins, unified_model
from isingdiv.oracles import (
    Backend, OracleBundle, count, count_median, default_repetitions, glauber_steps, sample, sample_many,
    stream,
)

EXACT = OracleBundle(Backend.EXACT)
GLAUBER = OracleBundle(Backend.GLAUBER)
NOISY = OracleBundle(Backend.NOISY)


def empirical_tv(model, spins):
    freq = np.bincount(index_from_spins(spins), minlength=2**model.n) / len(spins)
    return 0.5 * np.abs(freq - np.exp(exact.log_probabilities(model))).sum()


class TestBundle:
    def test_even_repetitions_rejected(self):
        with pytest.raises(InputError):
            OracleBundle(counting_repetitions=4)

    def test_backend_from_string(self):
        assert OracleBundle("noisy").backend is Backend.NOISY

    def test_exact_capacity(self):
        bundle = OracleBundle(limit=exact.ExactLimit(max_n=3))
        with pytest.raises(CapacityError):
            count(bundle, IsingModel(4, (), (0.0,) * 4), 0.1, stream(0))

    @pytest.mark.parametrize("alpha", [1, 2, 3, 10, 100])
    def test_default_repetitions_odd(self, alpha):
        r = default_repetitions(alpha)
        assert r % 2 == 1 and r >= 15


class TestSampling:
    def test_exact_k2(self):
        s = sample_many(EXACT, unified_model(2, [(0, 1)], 2.0), 0.01, 10**5, stream(1))
        assert abs(((s[:, 0] == 1) & (s[:, 1] == 1)).mean() - 1 / 3) < 0.01

    def test_glauber_single_vertex(self):
        s = sample_many(GLAUBER, IsingModel(1, (), (0.0,)), 0.01, 10**5, stream(2))
        assert abs((s[:, 0] == 1).mean() - 0.5) < 0.01

    def test_glauber_product_chain(self):
        model = unified_model(2, [(0, 1)], 1.0)
        assert empirical_tv(model, sample_many(GLAUBER, model, 0.01, 10**5, stream(3))) <= 0.02

    @pytest.mark.parametrize("model", [
        unified_model(2, [(0, 1)], 3.0),
        IsingModel(3, ((0, 1, 0.7), (1, 2, -0.4), (0, 2, 0.2)), (0.3, -0.5, 0.1)),
    ])
    def test_glauber_stationary(self, model):
        assert empirical_tv(model, sample_many(GLAUBER, model, 1e-3, 10**5, stream(4))) <= 0.02

    def test_single_sample_shape(self):
        c = sample(EXACT, unified_model(3, [(0, 1)], 2.0), 0.1, stream(5))
        assert c.n == 3

    def test_bad_eps(self):
        with pytest.raises(InputError):
            sample(EXACT, IsingModel(1, (), (0.0,)), 0.0, stream(0))

    def test_noisy_corruption_rate(self):
        # a point mass, so every uniform resample that lands elsewhere is visible
        model = IsingModel(1, (), (30.0,))
        s = sample_many(NOISY, model, 0.2, 10**5, stream(6))
        assert abs((s[:, 0] == -1).mean() - 0.1) < 0.005

    @pytest.mark.parametrize("bundle", [EXACT, GLAUBER, NOISY], ids=lambda b: b.backend.value)
    def test_deterministic(self, bundle):
        model = unified_model(3, [(0, 1), (1, 2)], 2.0)
        a = sample_many(bundle, model, 0.05, 200, stream(9, 1))
        b = sample_many(bundle, model, 0.05, 200, stream(9, 1))
        assert np.array_equal(a, b)


def test_glauber_steps_policy():
    assert glauber_steps(GLAUBER, 4, 0.01) == math.ceil(20 * 4 * math.log(400))
    assert glauber_steps(OracleBundle(Backend.GLAUBER, glauber_c=1.0), 1, 0.5) == 1


class TestCounting:
    def test_exact_single_vertex(self):
        assert count(EXACT, IsingModel(1, (), (0.0,)), 0.1, stream(0)).log_z_hat == math.log(2)

    def test_exact_allows_zero_eps(self):
        assert count(EXACT, IsingModel(1, (), (0.0,)), 0.0, stream(0)).log_z_hat == math.log(2)

    @pytest.mark.parametrize("bundle", [GLAUBER, NOISY], ids=lambda b: b.backend.value)
    def test_zero_eps_rejected(self, bundle):
        with pytest.raises(InputError):
            count(bundle, IsingModel(1, (), (0.0,)), 0.0, stream(0))

    def test_annealed_k2(self):
        model = unified_model(2, [(0, 1)], 2.0)
        target = math.log(6) - 0.5 * math.log(2)  # Ising normalisation: 6 / sqrt(beta)
        hits = sum(abs(count(GLAUBER, model, 0.1, stream(s)).log_z_hat - target) <= 0.1 for s in range(100))
        assert hits >= 95

    def test_annealed_zero_couplings_closed_form(self):
        model = IsingModel(3, (), (0.3, -0.2, 1.0))
        assert count(GLAUBER, model, 0.1, stream(0)).log_z_hat == pytest.approx(exact.log_partition(model))

    def test_noisy_success_fraction(self):
        model = unified_model(3, [(0, 1), (1, 2)], 2.0)
        truth = exact.log_partition(model)
        rng = stream(11)
        hits = sum(abs(count(NOISY, model, 0.1, rng).log_z_hat - truth) <= 0.1 for _ in range(10**4))
        assert hits / 10**4 >= 0.985

    def test_median_exact(self):
        model = unified_model(3, [(0, 1)], 2.0)
        assert count_median(EXACT, model, 0.1, 7, stream(0)).log_z_hat == exact.log_partition(model)

    def test_median_even_rejected(self):
        with pytest.raises(InputError):
            count_median(NOISY, IsingModel(1, (), (0.0,)), 0.1, 2, stream(0))

    def test_median_of_one_matches_count(self):
        model = unified_model(2, [(0, 1)], 2.0)
        a = count_median(NOISY, model, 0.1, 1, stream(5)).log_z_hat
        b = count(NOISY, model, 0.1, stream(5)).log_z_hat
        assert a == b

    def test_median_15_never_fails(self):
        model = unified_model(2, [(0, 1)], 2.0)
        truth = exact.log_partition(model)
        rng = stream(12)
        failures = sum(abs(count_median(NOISY, model, 0.1, 15, rng).log_z_hat - truth) > 0.1
                       for _ in range(1000))
        assert failures == 0

    def test_median_success_monotone_in_repetitions(self):
        # per-call failure 1%: medians of more calls fail less often
        model = IsingModel(1, (), (0.0,))
        truth = math.log(2)
        rates = []
        for reps in (1, 3, 5):
            rng = stream(13, reps)
            ok = sum(abs(count_median(NOISY, model, 0.1, reps, rng).log_z_hat - truth) <= 0.1 for _ in range(5000))
            rates.append(ok / 5000)
        assert rates[0] <= rates[1] <= rates[2]

    @given(st.integers(0, 2**32), st.sampled_from([Backend.EXACT, Backend.NOISY]))
    def test_deterministic(self, seed, backend):
        bundle = OracleBundle(backend)
        model = unified_model(3, [(0, 1), (1, 2)], 1.5)
        a = count_median(bundle, model, 0.05, 5, stream(seed))
        b = count_median(bundle, model, 0.05, 5, stream(seed))
        assert a == b
