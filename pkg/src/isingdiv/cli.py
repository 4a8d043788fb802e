"""Command-line driver.

Every subcommand except a bare ``gen`` prints one JSON RunRecord::

    {"command": ..., "seed": ..., "config": {...}, "outputs": {...}}

``config`` echoes the parsed flags that can change the outputs. ``--threads``,
``--output``, ``--quiet`` and ``--timings`` are left out, so records from runs
that differ only in those flags compare byte-for-byte. Wall-clock phases are
added under ``timings_ms`` only with ``--timings``.

Exit codes: 0 success, 1 a verification suite reported failures,
2 malformed input, 3 capacity exceeded, 4 oracle guarantee violated.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import secrets
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import analysis, divergences as dv, exact, graphs, suites
from .errors import CapacityError, InputError, OracleError
from .estimators import EstimatorConfig, Mode, estimate
from .model import IsingModel, ModelPair, dump_pair, load_pair, unified_model
from .oracles import Backend, OracleBundle

EXIT_OK, EXIT_CHECKS_FAILED, EXIT_INPUT, EXIT_CAPACITY, EXIT_ORACLE = 0, 1, 2, 3, 4

_NOT_ECHOED = {"func", "threads", "output", "quiet", "timings", "seed"}

BENCH_FIELDS = ("instance", "kind", "T", "epsilon", "trials", "success_rate",
                "median_abs_log_error", "wall_ms")


def builtin_instances() -> dict:
    """Named pairs usable as ``bench --instance``."""
    return {
        "single": ModelPair(IsingModel(1, (), (0.0,)), IsingModel(1, (), (0.002,))),
        "k2": ModelPair(unified_model(2, [(0, 1)], 1.0), unified_model(2, [(0, 1)], 4.0)),
    }


# --- JSON output -------------------------------------------------------------


def _clean(obj):
    """Plain JSON types; non-finite floats become ``null``."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):  # enums
        return obj.value
    return obj


def to_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


class Run:
    """Collects phase timings and emits the RunRecord."""

    def __init__(self, args):
        self.args = args
        self.phases = {}

    @contextmanager
    def phase(self, name):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.phases[name] = 1e3 * (time.perf_counter() - start)

    def info(self, message):
        if not self.args.quiet:
            print(message, file=sys.stderr)

    def record(self, outputs) -> dict:
        config = {k: v for k, v in sorted(vars(self.args).items()) if k not in _NOT_ECHOED}
        rec = {"command": self.args.command, "seed": self.args.seed, "config": config,
               "outputs": outputs}
        if self.args.timings:
            rec["timings_ms"] = self.phases
        return rec

    def emit(self, outputs):
        text = to_json(self.record(outputs))
        if self.args.output:
            Path(self.args.output).write_text(text)
            self.info(f"wrote {self.args.output}")
        else:
            sys.stdout.write(text)


def _bundle(args) -> OracleBundle:
    return OracleBundle(Backend(args.backend), glauber_c=args.glauber_c, counting_repetitions=args.count_reps)


def _csv_floats(text, cast=float):
    try:
        return [cast(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"malformed list {text!r}") from exc


# --- gen ---------------------------------------------------------------------


def _uniform_or(value, rng, size, spread):
    if value is not None:
        return np.full(size, float(value))
    if spread:
        return rng.uniform(-spread, spread, size)
    return np.zeros(size)


def generate_pair(family: str, rng, h_nu=None, h_mu=None, j_nu=None, j_mu=None, spread=0.0) -> ModelPair:
    """Build a pair from a family spec.

    ``unified:<family>:<beta_nu>:<beta_mu>`` gives zero-field models with
    couplings ``ln(beta)/2``. Other families take constant couplings and fields
    from the flags; unset ones are drawn from ``U[-spread, spread]`` (or 0).
    """
    tokens = family.split(":")
    if tokens[0] == "unified":
        n, edges, used = graphs.parse_family(tokens[1:], rng)
        rest = tokens[1 + used:]
        if len(rest) != 2:
            raise InputError(f"unified family needs <family>:<beta_nu>:<beta_mu>, got {family!r}")
        try:
            beta_nu, beta_mu = float(rest[0]), float(rest[1])
        except ValueError as exc:
            raise InputError(f"malformed beta in {family!r}") from exc
        return ModelPair(unified_model(n, edges, beta_nu), unified_model(n, edges, beta_mu))
    n, edges, used = graphs.parse_family(tokens, rng)
    if used != len(tokens):
        raise InputError(f"trailing tokens in family {family!r}")

    def build(h, j):
        jv = _uniform_or(j, rng, len(edges), spread)
        hv = _uniform_or(h, rng, n, spread)
        return IsingModel(n, tuple((u, v, float(x)) for (u, v), x in zip(edges, jv)), tuple(hv.tolist()))

    return ModelPair(build(h_nu, j_nu), build(h_mu, j_mu))


def cmd_gen(args, run: Run) -> int:
    rng = np.random.default_rng(args.seed)
    with run.phase("generate"):
        pair = generate_pair(args.family, rng, args.h_nu, args.h_mu, args.j_nu, args.j_mu, args.random)
    text = dump_pair(pair)
    if not args.output:
        sys.stdout.write(text)
        return EXIT_OK
    Path(args.output).write_text(text)
    out = {"path": str(args.output), "n": pair.n, "m": pair.m}
    sys.stdout.write(to_json(run.record(out)))
    return EXIT_OK


# --- exact / estimate / bounds -------------------------------------------------


def cmd_exact(args, run: Run) -> int:
    pair = load_pair(args.pair)
    kind = dv.parse(args.divergence)
    with run.phase("enumerate"):
        value = exact.exact_divergence(pair, kind)
        out = {"kind": kind.spec, "value": value,
               "log_z_nu": exact.log_partition(pair.nu), "log_z_mu": exact.log_partition(pair.mu)}
    run.emit(out)
    return EXIT_OK


def cmd_estimate(args, run: Run) -> int:
    pair = load_pair(args.pair)
    cfg = EstimatorConfig(epsilon=args.eps, mode=Mode(args.mode), samples=args.samples, delta=args.delta,
                          seed=args.seed, threads=args.threads)
    with run.phase("estimate"):
        result = estimate(pair, args.divergence, cfg, _bundle(args))
    run.emit(result.to_dict())
    return EXIT_OK


def cmd_bounds(args, run: Run) -> int:
    pair = load_pair(args.pair)
    kinds = args.kinds.split(",") if args.kinds else None
    alphas = _csv_floats(args.alphas, int)
    with run.phase("bounds"):
        report = analysis.bounds_report(pair, kinds, alphas, with_exact=not args.no_exact)
    run.emit(report.to_dict())
    return EXIT_OK


# --- verify ------------------------------------------------------------------


def cmd_verify(args, run: Run) -> int:
    names = list(suites.SUITES) if args.suite == "all" else [args.suite]
    results = []
    for name in names:
        res = suites.run_suite(name, args.n_max, args.cases, args.seed)
        run.phases[name] = 1e3 * res.seconds
        run.info(f"{name}: {'pass' if res.passed else 'FAIL'} ({res.checks} checks)")
        results.append(res.to_dict())
    passed = all(r["passed"] for r in results)
    run.emit({"passed": passed, "suites": results})
    return EXIT_OK if passed else EXIT_CHECKS_FAILED


# --- bench -------------------------------------------------------------------


def _trial_seed(seed: int, *key) -> int:
    return int(np.random.SeedSequence([seed, *key]).generate_state(1, np.uint64)[0])


def bench_rows(instances: dict, kinds, sample_sizes, epsilons, trials, seed, bundle, threads=1):
    """One row per (instance, kind, T, eps): success rate against the exact value."""
    rows = []
    for i_idx, (name, pair) in enumerate(instances.items()):
        for k_idx, kind in enumerate(kinds):
            truth = exact.exact_divergence(pair, kind)
            for T in sample_sizes:
                for eps in epsilons:
                    errors, hits = [], 0
                    start = time.perf_counter()
                    for trial in range(trials):
                        cfg = EstimatorConfig(epsilon=eps, samples=T, threads=threads,
                                              seed=_trial_seed(seed, i_idx, k_idx, trial))
                        value = estimate(pair, kind, cfg, bundle).value
                        if truth == 0 or value <= 0:
                            err = 0.0 if value == truth else math.inf
                        else:
                            err = abs(math.log(value / truth))
                        errors.append(err)
                        hits += err <= eps
                    rows.append({
                        "instance": name, "kind": kind.spec, "T": T, "epsilon": eps, "trials": trials,
                        "success_rate": hits / trials,
                        "median_abs_log_error": float(np.median(errors)),
                        "wall_ms": 1e3 * (time.perf_counter() - start),
                    })
    return rows


def cmd_bench(args, run: Run) -> int:
    instances = {}
    for path in args.pair or []:
        instances[Path(path).stem] = load_pair(path)
    known = builtin_instances()
    for name in args.instance or []:
        if name not in known:
            raise InputError(f"unknown instance {name!r}; choose from {sorted(known)}")
        instances[name] = known[name]
    if not instances:
        raise InputError("bench needs at least one --pair or --instance")
    kinds = [dv.parse(s) for s in (args.divergence or ["chi:2"])]
    with run.phase("bench"):
        rows = bench_rows(instances, kinds, _csv_floats(args.samples, int), _csv_floats(args.eps),
                          args.trials, args.seed, _bundle(args), args.threads)
    with open(args.csv, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCH_FIELDS)
        writer.writeheader()
        writer.writerows(rows)
    run.info(f"wrote {args.csv}")
    shown = [{k: v for k, v in r.items() if k != "wall_ms" or args.timings} for r in rows]
    run.emit({"csv": str(args.csv), "rows": shown})
    return EXIT_OK


# --- parser ------------------------------------------------------------------


def _odd(text):
    value = int(text)
    if value < 1 or value % 2 == 0:
        raise argparse.ArgumentTypeError(f"must be an odd positive integer, got {text}")
    return value


def _seed(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in an unsigned 64-bit integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--seed", type=_seed, default=None, help="root seed (default: drawn from entropy)")
    g.add_argument("--threads", type=int, default=1, help="worker threads; outputs do not depend on it")
    g.add_argument("--backend", choices=[b.value for b in Backend], default="exact")
    g.add_argument("--glauber-c", type=float, default=20.0, help="Glauber step-count constant")
    g.add_argument("--count-reps", type=_odd, default=None, help="median size for counting calls")
    g.add_argument("--quiet", action="store_true", help="print nothing but JSON")
    g.add_argument("--output", default=None, help="write the JSON result here instead of stdout")
    g.add_argument("--timings", action="store_true", help="include wall-clock phases in the record")

    parser = argparse.ArgumentParser(prog="isingdiv", description="f-divergences between Ising models")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="write a model-pair JSON file")
    p.add_argument("family", help="path:<n>, cycle:<n>, complete:<n>, regular:<n>:<d>, petersen, "
                                  "or unified:<family>:<beta_nu>:<beta_mu>")
    p.add_argument("--h-nu", type=float, default=None)
    p.add_argument("--h-mu", type=float, default=None)
    p.add_argument("--j-nu", type=float, default=None)
    p.add_argument("--j-mu", type=float, default=None)
    p.add_argument("--random", type=float, default=0.0, metavar="R",
                   help="draw unset couplings and fields from U[-R, R]")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("exact", parents=[common], help="exact divergence by enumeration")
    p.add_argument("--pair", required=True)
    p.add_argument("--divergence", required=True)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("estimate", parents=[common], help="oracle-based estimate")
    p.add_argument("--pair", required=True)
    p.add_argument("--divergence", required=True)
    p.add_argument("--eps", type=float, default=0.3)
    p.add_argument("--mode", choices=[m.value for m in Mode], default="practical")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--delta", type=float, default=None, help="counting relative error override")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("bounds", parents=[common], help="lower bounds and their exact checks")
    p.add_argument("--pair", required=True)
    p.add_argument("--kinds", default=None, help="comma-separated divergence specs")
    p.add_argument("--alphas", default="1,2,3")
    p.add_argument("--no-exact", action="store_true", help="skip checks that need enumeration")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", parents=[common], help="seeded verification suites")
    p.add_argument("--suite", choices=[*suites.SUITES, "all"], default="all")
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--cases", type=int, default=100)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", parents=[common], help="success-rate sweep over T and eps")
    p.add_argument("--pair", action="append", help="pair file (repeatable)")
    p.add_argument("--instance", action="append", help=f"built-in pair: {', '.join(builtin_instances())}")
    p.add_argument("--divergence", action="append", help="divergence spec (repeatable, default chi:2)")
    p.add_argument("--samples", default="1000,10000,100000", help="comma-separated T values")
    p.add_argument("--eps", default="0.3", help="comma-separated epsilons")
    p.add_argument("--trials", type=int, default=30)
    p.add_argument("--csv", default="bench.csv")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is None:
        args.seed = secrets.randbits(64)
    run = Run(args)
    try:
        return args.func(args, run)
    except InputError as exc:
        code, message = EXIT_INPUT, str(exc)
    except OSError as exc:
        code, message = EXIT_INPUT, f"{exc.strerror}: {exc.filename}"
    except CapacityError as exc:
        code, message = EXIT_CAPACITY, str(exc)
    except OracleError as exc:
        code, message = EXIT_ORACLE, str(exc)
    print(f"error: {message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
