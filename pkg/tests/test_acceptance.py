"""Acceptance gate: the ten primary criteria at their stated tolerances.

Each ``criterion_*`` function returns ``(passed, detail)``. Under pytest every
criterion is one test and the collected lines are printed in the terminal
summary; ``python tests/test_acceptance.py`` prints them directly.
"""

from __future__ import annotations

import contextlib
import io
import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from isingdiv import divergences as dv, exact, suites
from isingdiv.cli import main as cli_main
from isingdiv.estimators import (
    EstimatorConfig, estimate, estimate_alpha_div_large, estimate_hellinger_large,
)
from isingdiv.model import IsingModel, ModelPair, index_from_spins, unified_model
from isingdiv.oracles import Backend, OracleBundle, count, count_median, sample_many, stream

RESULTS: dict[int, str] = {}

SMALL_PAIR = ModelPair(IsingModel(1, (), (0.0,)), IsingModel(1, (), (0.002,)))
LARGE_PAIR = ModelPair(unified_model(2, [(0, 1)], 1.0), unified_model(2, [(0, 1)], 4.0))
E2E_KINDS = ("chi:1", "chi:2", "kl", "js", "renyi", "alpha:2", "alpha:0.5", "hellinger2")


def _suite(name, budget=None, **kw):
    start = time.perf_counter()
    res = getattr(suites, f"suite_{name}")(**kw)
    secs = time.perf_counter() - start
    ok = res.passed and (budget is None or secs < budget)
    detail = f"{res.checks} checks, {len(res.failures)} failures, {secs:.1f}s"
    if budget is not None:
        detail += f" (budget {budget}s)"
    return ok, detail


def criterion_1():
    return _suite("identities", budget=30, n_max=8, cases=100, seed=1)


def criterion_2():
    return _suite("binomial", n_max=8, cases=50, seed=2)


def criterion_3():
    return _suite("lemmas", budget=120, n_max=8, cases=200, seed=3)


def criterion_4():
    return _suite("bcoef")


def _table_F(kind, zeta):
    if kind.name == "chi":
        return kind.alpha * zeta ** (kind.alpha - 1)
    if kind.name == "alpha":
        return 2 * 4 ** abs(kind.alpha - 2) * zeta
    return {"kl": 6, "renyi": 18, "js": 10, "hellinger2": 2 * math.sqrt(3)}[kind.name] * zeta


def criterion_5():
    ok, detail = _suite("condition", cases=200, seed=5)
    mismatches = [k.spec for k in dv.catalog() for z in (1.0, 2.5, 40.0, 500.0)
                  if dv.condition_witness(k).F(z) != _table_F(k, z)]
    return ok and not mismatches, detail + f", F table mismatches: {mismatches or 'none'}"


def criterion_6():
    start = time.perf_counter()
    worst = []
    ok = True
    for label, pair, T in (("single-vertex", SMALL_PAIR, 10**6), ("K2", LARGE_PAIR, 10**5)):
        for spec in E2E_KINDS:
            truth = exact.exact_divergence(pair, spec)
            hits = 0
            for seed in range(30):
                value = estimate(pair, spec, EstimatorConfig(epsilon=0.3, samples=T, seed=seed)).value
                hits += value > 0 and abs(math.log(value / truth)) <= 0.3
            ok &= hits >= 20
            worst.append((hits, f"{label}/{spec}"))
    secs = time.perf_counter() - start
    ok &= secs < 300
    low = min(worst)
    return ok, f"min hits {low[0]}/30 ({low[1]}), {len(worst)} cells, {secs:.0f}s (budget 300s)"


def criterion_7():
    rng = np.random.default_rng(7)
    pairs = [LARGE_PAIR, SMALL_PAIR] + [suites.random_pair(rng, 8) for _ in range(50)]
    cfg = EstimatorConfig(samples=1, delta=0.0)
    bundle = OracleBundle(Backend.EXACT)
    worst = 0.0
    for pair in pairs:
        for a in (2.0, 0.5, -1.0):
            got = estimate_alpha_div_large(pair, a, cfg, bundle).value
            worst = max(worst, abs(got - exact.exact_divergence(pair, dv.alpha_div(a))))
        got = estimate_hellinger_large(pair, cfg, bundle).value
        worst = max(worst, abs(got - exact.exact_divergence(pair, dv.HELLINGER)))
    return worst <= 1e-10, f"{len(pairs)} pairs, max |closed form - exact| = {worst:.2e}"


def criterion_8():
    return _suite("hardness", budget=30)


def criterion_9():
    exact_bundle, noisy = OracleBundle(Backend.EXACT), OracleBundle(Backend.NOISY)
    models = [
        IsingModel(1, (), (0.4,)),
        unified_model(2, [(0, 1)], 2.0),
        IsingModel(2, ((0, 1, -0.8),), (0.3, -0.1)),
        IsingModel(3, ((0, 1, 0.5), (1, 2, -0.7), (0, 2, 0.2)), (0.1, -0.4, 0.6)),
        unified_model(3, [(0, 1), (1, 2)], 3.0),
    ]
    tvs = []
    for i, m in enumerate(models):
        spins = sample_many(exact_bundle, m, 0.01, 10**5, stream(9, i))
        freq = np.bincount(index_from_spins(spins), minlength=2**m.n) / 10**5
        tvs.append(0.5 * np.abs(freq - np.exp(exact.log_probabilities(m))).sum())
    target = models[3]
    truth = exact.log_partition(target)
    rng = stream(9, 100)
    noisy_ok = sum(abs(count(noisy, target, 0.1, rng).log_z_hat - truth) <= 0.1 for _ in range(10**4)) / 10**4
    rng = stream(9, 101)
    median_fail = sum(abs(count_median(noisy, target, 0.1, 15, rng).log_z_hat - truth) > 0.1 for _ in range(10**3))
    ok = max(tvs) <= 0.02 and noisy_ok >= 0.985 and median_fail == 0
    return ok, (f"max sampler TV {max(tvs):.4f} (<= 0.02), noisy success {noisy_ok:.4f} (>= 0.985), "
                f"median-15 failures {median_fail}/1000")


def _cli(argv):
    out = io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(io.StringIO()):
        code = cli_main(argv)
    return code, out.getvalue()


def criterion_10():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        k2, small = tmp / "k2.json", tmp / "small.json"
        _cli(["gen", "unified:complete:2:1:4", "--output", str(k2), "--seed", "0"])
        _cli(["gen", "path:1", "--h-nu", "0", "--h-mu", "0.002", "--output", str(small), "--seed", "0"])
        commands = [
            ["gen", "regular:8:3", "--random", "1"],
            ["exact", "--pair", str(k2), "--divergence", "kl"],
            ["bounds", "--pair", str(k2)],
            ["verify", "--suite", "binomial", "--cases", "5"],
            ["bench", "--instance", "k2", "--samples", "1000", "--trials", "3", "--csv", str(tmp / "b.csv")],
        ]
        for backend in ("exact", "noisy"):
            for spec in ("chi:2", "chi:1", "kl", "js", "alpha:-1", "hellinger2"):
                commands.append(["estimate", "--pair", str(k2), "--divergence", spec, "--samples", "5000",
                                 "--backend", backend])
            commands.append(["estimate", "--pair", str(small), "--divergence", "renyi", "--samples", "5000",
                             "--backend", backend])
        mismatched = []
        for argv in commands:
            outs = {_cli(argv + ["--seed", "31337", "--threads", t]) for t in ("1", "8", "1", "8")}
            if len(outs) != 1 or next(iter(outs))[0] != 0:
                mismatched.append(" ".join(argv[:4]))
    return not mismatched, f"{len(commands)} commands x threads {{1, 8}} x 2 runs, mismatches: {mismatched or 'none'}"


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 11)}


def _run(i):
    ok, detail = CRITERIA[i]()
    RESULTS[i] = f"{'PASS' if ok else 'FAIL'} criterion {i:2d}: {detail}"
    return ok, detail


@pytest.mark.parametrize("number", list(CRITERIA))
def test_criterion(number):
    ok, detail = _run(number)
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for i in CRITERIA:
        ok, _ = _run(i)
        print(RESULTS[i], flush=True)
        failed += not ok
    sys.exit(1 if failed else 0)
