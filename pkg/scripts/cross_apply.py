"""Tune each algorithm per dataset, then run every tuned config on every dataset.

Prints the column Std of the cross matrix for each algorithm; a small Std means
the algorithm cares little about which dataset it was tuned on.
"""
import argparse
from pathlib import Path

import numpy as np

from ltdrbm.hyperopt import SearchSpace, alternating_optimize, cross_apply
from ltdrbm.synthgen import SynthConfig, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--algorithms", nargs="+", default=["rbm", "mle"])
    ap.add_argument("--datasets", type=int, default=5)
    ap.add_argument("--n-sources", type=int, default=8)
    ap.add_argument("--n-attributes", type=int, default=300)
    ap.add_argument("--seed", type=int, default=100)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("runs/cross"))
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    datasets, names = [], []
    for i in range(args.datasets):
        cfg = SynthConfig(n_sources=args.n_sources, n_attributes=args.n_attributes,
                          source_accuracy=float(rng.uniform(0.55, 0.85)),
                          copy_probability=float(rng.uniform(0, 0.6)),
                          values_max=int(rng.integers(2, 8)), rng_seed=args.seed + i)
        datasets.append(generate(cfg)[0])
        names.append(f"d{i}")

    space = SearchSpace({"init_tpr": [0.6, 0.7, 0.8, 0.9], "init_fpr": [0.1, 0.2, 0.3, 0.4],
                         "init_prevalence": [0.3, 0.5, 0.7]})
    args.out.mkdir(parents=True, exist_ok=True)
    for alg in args.algorithms:
        configs = [alternating_optimize(alg, ds, space, jobs=args.jobs).best_params
                   for ds in datasets]
        m = cross_apply(alg, configs, datasets, names, jobs=args.jobs)
        m.write_csv(args.out / f"{alg}.csv")
        print(f"{alg:>9} Std per column: " + " ".join(f"{s:.4f}" for s in m.std)
              + f"  mean {np.mean(m.std):.4f}")


if __name__ == "__main__":
    main()
