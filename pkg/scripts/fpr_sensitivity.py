"""Accuracy as the initial false-positive rate varies, averaged over generator seeds."""
import argparse
import csv
from pathlib import Path

import numpy as np

from ltdrbm.hyperopt import sensitivity_sweep
from ltdrbm.synthgen import SynthConfig, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--algorithms", nargs="+", default=["rbm", "mle"])
    ap.add_argument("--grid", nargs="+", type=float,
                    default=[round(x, 2) for x in np.arange(0.05, 0.46, 0.05)])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--n-sources", type=int, default=20)
    ap.add_argument("--n-attributes", type=int, default=2000)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("runs/fpr_sensitivity.csv"))
    args = ap.parse_args()

    data = [generate(SynthConfig(n_sources=args.n_sources, n_attributes=args.n_attributes,
                                 source_accuracy=0.8, accuracy_variability=50,
                                 copy_probability=0.2, rng_seed=900 + s))[0]
            for s in range(args.seeds)]
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["algorithm", "init_fpr", "mean_acc"])
        for alg in args.algorithms:
            per_seed = np.array([[acc for _, acc in
                                  sensitivity_sweep(alg, ds, {}, "init_fpr", args.grid, jobs=args.jobs)]
                                 for ds in data])
            means = per_seed.mean(axis=0)
            for v, m in zip(args.grid, means):
                w.writerow([alg, v, repr(float(m))])
            print(f"{alg:>9} " + " ".join(f"{m:.4f}" for m in means)
                  + f"  range {means.max() - means.min():.4f}")


if __name__ == "__main__":
    main()
