"""Accuracy, characteristic-binned aggregation and runtime benchmarks."""
from __future__ import annotations

import csv
import json
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import discovery
from .claims import Dataset, DatasetStats
from .rbm import TruthEstimate
from .synthgen import SynthConfig, generate, measure_copy_frequency

CHARACTERISTICS = ("entropy", "copy_frequency", "avg_source_accuracy")


def accuracy(estimate: TruthEstimate, dataset: Dataset) -> float:
    """Fraction of attributes (or binary facts) with known truth that were resolved correctly.

    Categorical: the highest-scoring value per attribute is the prediction, ties
    go to the lowest value id, attributes without any candidate count as wrong.
    Binary: a fact is predicted true when its score exceeds 0.5.
    """
    if dataset.is_categorical:
        if dataset.attr_truth is None:
            raise ValueError("dataset has no ground truth")
        known = dataset.attr_truth >= 0
        if not known.any():
            raise ValueError("estimate and ground truth do not overlap")
        win = estimate.winners(dataset)
        predicted = np.where(win >= 0, dataset.fact_value[np.maximum(win, 0)], -1)
        return float(np.mean(predicted[known] == dataset.attr_truth[known]))
    if dataset.fact_truth is None:
        raise ValueError("dataset has no ground truth")
    known = dataset.fact_truth >= 0
    if not known.any():
        raise ValueError("estimate and ground truth do not overlap")
    pred = (estimate.scores() > 0.5).astype(np.int8)
    return float(np.mean(pred[known] == dataset.fact_truth[known]))


@dataclass
class DatasetRecord:
    """Characteristics of one evaluated dataset."""

    name: str
    entropy: float
    copy_frequency: float
    avg_source_accuracy: float
    n_claims: int

    @classmethod
    def of(cls, name: str, dataset: Dataset, copy_frequency: float = 0.0) -> DatasetRecord:
        stats = DatasetStats.of(dataset)
        return cls(name, stats.mean_entropy, copy_frequency,
                   stats.avg_source_accuracy if stats.avg_source_accuracy is not None else math.nan,
                   dataset.n_claims)


@dataclass
class Bin:
    center: float
    mean: float
    std: float
    count: int


def group_by_characteristic(results, characteristic: str, n_bins: int = 20) -> list[Bin]:
    """Equal-width bins over the observed range of ``characteristic``.

    ``results`` is a sequence of ``(DatasetRecord, accuracy)`` pairs. Empty bins
    are reported with a NaN mean and std and a zero count.
    """
    if characteristic not in CHARACTERISTICS:
        raise ValueError(f"unknown characteristic {characteristic!r}")
    xs = np.array([getattr(r, characteristic) for r, _ in results], dtype=float)
    accs = np.array([a for _, a in results], dtype=float)
    ok = ~np.isnan(xs)
    xs, accs = xs[ok], accs[ok]
    if len(xs) == 0:
        return []
    lo, hi = xs.min(), xs.max()
    width = (hi - lo) / n_bins
    if width > 0:
        idx = np.minimum(((xs - lo) / width).astype(int), n_bins - 1)
    else:
        idx = np.zeros(len(xs), dtype=int)
        width = 1.0 / n_bins
    out = []
    for b in range(n_bins):
        members = accs[idx == b]
        center = lo + (b + 0.5) * width
        if len(members):
            out.append(Bin(float(center), float(members.mean()), float(members.std()), len(members)))
        else:
            out.append(Bin(float(center), math.nan, math.nan, 0))
    return out


@dataclass
class EvalReport:
    records: list[DatasetRecord]
    accuracies: dict[str, list[float]]
    runtimes: dict[str, list[float]]
    n_bins: int = 20
    series: dict[str, dict[str, list[Bin]]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.series:
            for alg, accs in self.accuracies.items():
                pairs = list(zip(self.records, accs))
                self.series[alg] = {c: group_by_characteristic(pairs, c, self.n_bins)
                                    for c in CHARACTERISTICS}

    def rows(self):
        for alg, per_char in self.series.items():
            for char, bins in per_char.items():
                for b in bins:
                    yield {"algorithm": alg, "characteristic": char, "bin_center": b.center,
                           "mean_acc": b.mean, "std_acc": b.std, "count": b.count}

    def write_csv(self, path) -> None:
        cols = ["algorithm", "characteristic", "bin_center", "mean_acc", "std_acc", "count"]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
            w.writeheader()
            for row in self.rows():
                w.writerow({k: ("" if isinstance(v, float) and math.isnan(v) else
                                (repr(v) if isinstance(v, float) else v))
                            for k, v in row.items()})

    def to_dict(self) -> dict:
        def clean(x):
            if isinstance(x, float) and math.isnan(x):
                return None
            if isinstance(x, dict):
                return {k: clean(v) for k, v in x.items()}
            if isinstance(x, list):
                return [clean(v) for v in x]
            return x
        return clean({
            "binning": {"scheme": "equal-width", "n_bins": self.n_bins},
            "datasets": [asdict(r) for r in self.records],
            "accuracy": self.accuracies,
            "runtime_seconds": self.runtimes,
            "series": {alg: {c: [asdict(b) for b in bins] for c, bins in per.items()}
                       for alg, per in self.series.items()},
        })

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _evaluate_one(args):
    algorithm, dataset, params, seed = args
    t0 = time.perf_counter()
    est = discovery.estimate(algorithm, dataset, params, seed)
    elapsed = time.perf_counter() - t0
    return accuracy(est, dataset), elapsed


def evaluate(datasets: list[tuple[DatasetRecord, Dataset]], algorithms, params=None,
             seed: int = 0, n_bins: int = 20, jobs: int = 1) -> EvalReport:
    tasks = [(alg, ds, params, seed) for alg in algorithms for _, ds in datasets]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            outcomes = list(pool.map(_evaluate_one, tasks))
    else:
        outcomes = [_evaluate_one(t) for t in tasks]
    accs: dict[str, list[float]] = {}
    times: dict[str, list[float]] = {}
    for (alg, *_), (acc, sec) in zip(tasks, outcomes):
        accs.setdefault(alg, []).append(acc)
        times.setdefault(alg, []).append(sec)
    return EvalReport([r for r, _ in datasets], accs, times, n_bins)


def synthetic_collection(configs: list[SynthConfig]) -> list[tuple[DatasetRecord, Dataset]]:
    out = []
    for cfg in configs:
        ds, profiles = generate(cfg)
        rec = DatasetRecord.of(f"seed{cfg.rng_seed}", ds, measure_copy_frequency(ds, profiles))
        out.append((rec, ds))
    return out


# --------------------------------------------------------------------------
# runtime

def dataset_of_size(n_claims: int, seed: int = 0, **overrides) -> Dataset:
    """Synthetic categorical dataset with roughly ``n_claims`` binary claims."""
    pilot_cfg = SynthConfig(n_attributes=200, rng_seed=seed, **overrides)
    pilot, _ = generate(pilot_cfg)
    per_attr = pilot.n_claims / pilot_cfg.n_attributes
    n_attr = max(1, round(n_claims / per_attr))
    return generate(SynthConfig(n_attributes=n_attr, rng_seed=seed, **overrides))[0]


def time_discovery(algorithm: str, dataset: Dataset, params=None, seed: int = 0,
                   repeats: int = 3) -> float:
    """Median wall-clock seconds of the discovery call alone."""
    times = []
    for _ in range(max(repeats, 3)):
        t0 = time.perf_counter()
        discovery.estimate(algorithm, dataset, params, seed)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def benchmark_runtime(algorithm: str, sizes, params=None, seed: int = 0,
                      repeats: int = 3) -> list[tuple[int, float]]:
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise ValueError("sizes must be sorted ascending")
    # warm any lazily compiled kernels outside the timed region
    discovery.estimate(algorithm, dataset_of_size(200, seed), params, seed)
    out = []
    for n in sizes:
        ds = dataset_of_size(n, seed)
        out.append((ds.n_claims, time_discovery(algorithm, ds, params, seed, repeats)))
    return out
