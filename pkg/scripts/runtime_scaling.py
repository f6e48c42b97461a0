"""Wall-clock runtime of each algorithm on synthetic datasets of growing size."""
import argparse
import csv
from pathlib import Path

import numpy as np

from ltdrbm.evaluation import benchmark_runtime


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--algorithms", nargs="+", default=["majority", "rbm", "rbm-c", "mle", "ltm", "2est"])
    ap.add_argument("--sizes", nargs="+", type=int,
                    default=[int(x) for x in np.logspace(np.log10(200), 5, 8)])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--out", type=Path, default=Path("runs/runtime.csv"))
    args = ap.parse_args()

    sizes = sorted(args.sizes)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["algorithm", "claims", "seconds"])
        for alg in args.algorithms:
            points = benchmark_runtime(alg, sizes, repeats=args.repeats)
            for n, sec in points:
                w.writerow([alg, n, f"{sec:.6f}"])
                print(f"{alg:>9} {n:>8} claims {sec:9.4f} s")
            (n0, t0), (n1, t1) = points[0], points[-1]
            if t0 > 0:
                # close to n1/n0 for linear scaling
                print(f"{alg:>9} time ratio {t1 / t0:.1f} for size ratio {n1 / n0:.1f}")


if __name__ == "__main__":
    main()
