import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from isingdiv.model import IsingModel, ModelPair, unified_model

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def k2_pair(beta_nu=1.0, beta_mu=4.0):
    return ModelPair(unified_model(2, [(0, 1)], beta_nu), unified_model(2, [(0, 1)], beta_mu))


def single_pair(h_nu, h_mu):
    return ModelPair(IsingModel(1, (), (h_nu,)), IsingModel(1, (), (h_mu,)))


@st.composite
def models(draw, n_max=6, scale=1.0):
    n = draw(st.integers(1, n_max))
    possible = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(possible), unique=True)) if possible else []
    real = st.floats(-scale, scale, allow_nan=False)
    edges = tuple((u, v, draw(real)) for u, v in sorted(chosen))
    fields = tuple(draw(real) for _ in range(n))
    return IsingModel(n, edges, fields)


@st.composite
def pairs(draw, n_max=6, scale=1.0):
    nu = draw(models(n_max, scale))
    real = st.floats(-scale, scale, allow_nan=False)
    mu = IsingModel(nu.n, tuple((u, v, draw(real)) for u, v, _ in nu.edges),
                    tuple(draw(real) for _ in range(nu.n)))
    return ModelPair(nu, mu)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


LN2 = math.log(2.0)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for i in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[i])
