"""Seeded verification suites: identities, lower bounds, the witness condition,
the B coefficient and the hardness-reduction inequalities.

Each suite returns a :class:`SuiteResult`; ``failures`` lists the offending
cases so a red run is diagnosable from its JSON alone.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import analysis as an
from . import divergences as dv
from . import exact, graphs
from .model import IsingModel, ModelPair, model_to_dict

__all__ = [
    "SuiteResult",
    "random_model",
    "random_pair",
    "random_close_pair",
    "suite_identities",
    "suite_binomial",
    "suite_lemmas",
    "suite_condition",
    "suite_bcoef",
    "suite_hardness",
    "SUITES",
    "run_suite",
]

RATIO_TOL = 1e-10
BINOMIAL_TOL = 1e-8
CONDITION_TOL = 1e-9
B_TOL = 1e-9

HARDNESS_PARAMS = ((1.0, 2.0, 2), (1 / 3, 2 / 3, 2), (1 / 3, 1.0, 3))


@dataclass
class SuiteResult:
    name: str
    cases: int
    checks: int
    failures: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self, timings: bool = False):
        out = {"name": self.name, "passed": self.passed, "cases": self.cases,
               "checks": self.checks, "failures": self.failures[:20],
               "failure_count": len(self.failures)}
        if timings:
            out["seconds"] = self.seconds
        return out


# --- random instances --------------------------------------------------------


def random_model(rng, n: int, edges, coupling_range=1.0, field_range=1.0) -> IsingModel:
    j = rng.uniform(-coupling_range, coupling_range, len(edges))
    h = rng.uniform(-field_range, field_range, n)
    return IsingModel(n, tuple((u, v, float(x)) for (u, v), x in zip(edges, j)), tuple(h.tolist()))


def random_pair(rng, n_max: int = 8, n_min: int = 1, p_edge: float = 0.5) -> ModelPair:
    """Two independent models on one Erdos-Renyi graph, ``J, h ~ U[-1, 1]``."""
    n = int(rng.integers(n_min, n_max + 1))
    edges = graphs.erdos_renyi(n, p_edge, rng)
    return ModelPair(random_model(rng, n, edges), random_model(rng, n, edges))


def random_close_pair(rng, n_max: int = 8, n_min: int = 1, p_edge: float = 0.5) -> ModelPair:
    """``mu`` random; ``nu`` perturbs it so that ``d_par`` falls below the threshold."""
    n = int(rng.integers(n_min, n_max + 1))
    edges = graphs.erdos_renyi(n, p_edge, rng)
    mu = random_model(rng, n, edges)
    theta = 1.0 / (10.0 * (n + 3 * len(edges)))
    scale = theta * rng.uniform(0.05, 0.95)
    dj = rng.uniform(-scale, scale, len(edges))
    deg = np.zeros(n)
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    dh = rng.uniform(-scale, scale, n) * (deg + 1)
    nu = IsingModel(
        n,
        tuple((u, v, j + float(x)) for (u, v, j), x in zip(mu.edges, dj)),
        tuple((np.asarray(mu.fields) + dh).tolist()),
    )
    return ModelPair(nu, mu)


def _case(pair, **extra):
    return {"pair": {"nu": model_to_dict(pair.nu), "mu": model_to_dict(pair.mu)}, **extra}


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


# --- suites ------------------------------------------------------------------


def suite_identities(n_max=8, cases=100, seed=0, ks=range(7)) -> SuiteResult:
    """Direct ``sum nu^k / mu^(k-1)`` against the partition-function ratio."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("identities", cases, 0)
    for _ in range(cases):
        pair = random_pair(rng, n_max)
        for k in ks:
            r = exact.exact_ratio_identity(pair, k)
            res.checks += 1
            # compare in log space: the relative gap is expm1 of the log gap
            rel = abs(math.expm1(r.log_direct - r.log_ratio))
            if not rel <= RATIO_TOL:
                res.failures.append(_case(pair, k=k, rel_error=rel))
    return res


def suite_binomial(n_max=8, cases=50, seed=0, alphas=(2, 4)) -> SuiteResult:
    """Even-order chi^a against the signed sum of partition ratios."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("binomial", cases, 0)
    for _ in range(cases):
        pair = random_pair(rng, n_max)
        for a in alphas:
            direct = exact.exact_divergence(pair, dv.chi(a))
            expansion = exact.binomial_chi_sum(pair, a)
            res.checks += 1
            if not _rel(direct, expansion) <= BINOMIAL_TOL:
                res.failures.append(_case(pair, alpha=a, direct=direct, expansion=expansion))
    return res


def suite_lemmas(n_max=8, cases=200, seed=0, alphas=(1, 2, 3)) -> SuiteResult:
    """Lower bounds on random pairs plus the small-distance checks on close pairs."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("lemmas", cases, 0)
    kinds = dv.catalog()
    for _ in range(cases):
        for pair in (random_pair(rng, n_max), random_close_pair(rng, n_max)):
            report = an.bounds_report(pair, kinds, alphas)
            for c in report.checks:
                if not c.applicable:
                    continue
                res.checks += 1
                if not c.holds:
                    res.failures.append(_case(pair, check=c.to_dict()))
    return res


def suite_condition(cases=200, seed=0, zeta_max=500.0, kinds=None) -> SuiteResult:
    """``x f'(1 + zeta x) / f(1 + x) <= F(zeta)`` at random ``zeta``, ``x``."""
    rng = np.random.default_rng(seed)
    kinds = dv.catalog() if kinds is None else [dv.parse(k) for k in kinds]
    res = SuiteResult("condition", cases, 0)
    for kind in kinds:
        F = dv.condition_witness(kind).F
        zeta = rng.uniform(1.0, zeta_max, cases)
        x = rng.uniform(-1.0, 1.0, cases) / (2.0 * zeta)
        x = np.where(x == 0, 0.25 / zeta, x)
        for z, xi in zip(zeta, x):
            lhs = dv.condition_ratio(kind, z, xi)
            res.checks += 1
            if not lhs <= F(z) + CONDITION_TOL:
                res.failures.append({"kind": kind.spec, "zeta": z, "x": xi, "ratio": lhs, "F": F(z)})
    return res


def suite_bcoef(alphas=(1, 2, 3, 5), bs=(0.1, 0.3, 0.5), thetas=(1e-3, 1e-2, 1e-1)) -> SuiteResult:
    """Closed-form ``B`` against ``1 / min g`` found numerically; also ``B <= 1/2``."""
    grid = list(itertools.product(alphas, bs, thetas))
    res = SuiteResult("bcoef", len(grid), 0)
    for a, b, t in grid:
        B, t_star = an.B_coefficient(a, b, t)
        g_min, t_num = an.g_minimum(a, b, t)
        rel = abs(B * g_min - 1.0)
        res.checks += 2
        if not rel <= B_TOL:
            res.failures.append({"alpha": a, "b": b, "theta": t, "B": B, "inv_g_min": 1 / g_min, "rel": rel})
        if not B <= 0.5:
            res.failures.append({"alpha": a, "b": b, "theta": t, "B": B, "reason": "B > 1/2"})
    return res


def hardness_instances():
    """Named ``(n, edges)`` graphs for the reduction checks."""
    return {
        "path:6": (6, graphs.path(6)),
        "cycle:4": (4, graphs.cycle(4)),
        "cycle:7": (7, graphs.cycle(7)),
        "complete:4": (4, graphs.complete(4)),
        "complete:5": (5, graphs.complete(5)),
        "petersen": (10, graphs.petersen()),
    }


def suite_hardness(params=HARDNESS_PARAMS) -> SuiteResult:
    instances = hardness_instances()
    res = SuiteResult("hardness", len(instances) * len(params), 0)
    for (name, (n, edges)), (bn, bm, a) in itertools.product(instances.items(), params):
        for c in an.domination_check(n, edges, bn, bm, a):
            res.checks += 1
            if not c.holds:
                res.failures.append({"graph": name, "beta_nu": bn, "beta_mu": bm, "alpha": a,
                                     "check": c.to_dict()})
        rep = an.hardness_sandwich_check(n, edges, bn, bm, a)
        res.checks += 1
        if not (rep.holds and 1.0 <= rep.ratio <= 3.0**a):
            res.failures.append({"graph": name, "beta_nu": bn, "beta_mu": bm, "alpha": a,
                                 "sandwich": rep.to_dict()})
    return res


SUITES = {
    "identities": lambda n_max, cases, seed: suite_identities(n_max, cases, seed),
    "binomial": lambda n_max, cases, seed: suite_binomial(n_max, cases, seed),
    "lemmas": lambda n_max, cases, seed: suite_lemmas(n_max, cases, seed),
    "condition": lambda n_max, cases, seed: suite_condition(cases, seed),
    "bcoef": lambda n_max, cases, seed: suite_bcoef(),
    "hardness": lambda n_max, cases, seed: suite_hardness(),
}


def run_suite(name: str, n_max: int = 8, cases: int = 100, seed: int = 0) -> SuiteResult:
    start = time.perf_counter()
    res = SUITES[name](n_max, cases, seed)
    res.seconds = time.perf_counter() - start
    return res
