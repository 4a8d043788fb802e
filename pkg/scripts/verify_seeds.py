"""Run every verification suite over a range of seeds and tabulate failures.

    python scripts/verify_seeds.py --seeds 0-9 --cases 200
"""

import argparse

from isingdiv import suites


def seed_range(text):
    lo, _, hi = text.partition("-")
    return range(int(lo), int(hi or lo) + 1)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--seeds", type=seed_range, default=seed_range("0-4"))
    ap.add_argument("--cases", type=int, default=100)
    ap.add_argument("--n-max", type=int, default=8)
    args = ap.parse_args()

    total_fail = 0
    for name in suites.SUITES:
        fails, checks = 0, 0
        for seed in args.seeds:
            res = suites.run_suite(name, args.n_max, args.cases, seed)
            fails += len(res.failures)
            checks += res.checks
            for f in res.failures[:3]:
                print(f"  {name} seed={seed}: {({k: v for k, v in f.items() if k != 'pair'})}")
        total_fail += fails
        print(f"{name:>10}: {checks} checks, {fails} failures over seeds {args.seeds.start}-{args.seeds.stop - 1}")
    raise SystemExit(1 if total_fail else 0)


if __name__ == "__main__":
    main()
