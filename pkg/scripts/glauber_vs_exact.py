"""How far the Glauber backend drifts from enumeration on small models.

Reports sampler TV to the exact Gibbs distribution and the annealed ln Z error
as the step constant C varies; neither backend carries a mixing guarantee, so
this is the empirical check.

    python scripts/glauber_vs_exact.py --draws 20000
"""

import argparse

import numpy as np

from isingdiv import exact, graphs
from isingdiv.model import index_from_spins, unified_model
from isingdiv.oracles import Backend, OracleBundle, count, sample_many, stream


def instances():
    return {
        "K2 beta=4": unified_model(2, [(0, 1)], 4.0),
        "C5 beta=2": unified_model(5, graphs.cycle(5), 2.0),
        "K4 beta=0.5": unified_model(4, graphs.complete(4), 0.5),
        "Petersen beta=1.5": unified_model(10, graphs.petersen(), 1.5),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--draws", type=int, default=20000)
    ap.add_argument("--constants", default="1,5,20")
    ap.add_argument("--eps", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for name, model in instances().items():
        probs = np.exp(exact.log_probabilities(model))
        truth = exact.log_partition(model)
        for c in (float(x) for x in args.constants.split(",")):
            bundle = OracleBundle(Backend.GLAUBER, glauber_c=c)
            spins = sample_many(bundle, model, 0.01, args.draws, stream(args.seed, 0))
            freq = np.bincount(index_from_spins(spins), minlength=probs.size) / args.draws
            tv = 0.5 * np.abs(freq - probs).sum()
            log_z = count(bundle, model, args.eps, stream(args.seed, 1)).log_z_hat
            print(f"{name:>18} C={c:>4g}  sampler TV={tv:.4f}  ln Z error={log_z - truth:+.4f} "
                  f"(target |err| <= {args.eps})")


if __name__ == "__main__":
    main()
