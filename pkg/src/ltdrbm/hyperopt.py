"""Alternating hyperparameter search, cross-application matrices and 1-D sweeps."""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import discovery
from .claims import Dataset
from .evaluation import accuracy

log = logging.getLogger(__name__)

FAILED = -1.0

_RATES = [round(0.1 * i, 1) for i in range(1, 10)]
DEFAULT_GRIDS = {
    "init_tpr": _RATES,
    "init_fpr": _RATES,
    "init_prevalence": _RATES,
    "learning_rate": [0.001, 0.005, 0.01, 0.05],
    "learning_rate_decay": [0.0, 0.1, 0.5],
    "lambda_steps": [1, 5, 10, 20],
}

_DOMAINS = {
    "init_tpr": lambda x: 0 < x < 1,
    "init_fpr": lambda x: 0 < x < 1,
    "init_prevalence": lambda x: 0 < x < 1,
    "learning_rate": lambda x: x >= 0,
    "learning_rate_decay": lambda x: x >= 0,
    "lambda_steps": lambda x: int(x) == x and x >= 1,
}


@dataclass
class SearchSpace:
    grids: dict[str, list] = field(default_factory=lambda: dict(DEFAULT_GRIDS))

    def __post_init__(self):
        for name, grid in self.grids.items():
            if not grid:
                raise ValueError(f"empty grid for {name}")
            check = _DOMAINS.get(name)
            if check is not None and not all(check(v) for v in grid):
                raise ValueError(f"grid for {name} leaves the parameter's domain")

    @property
    def order(self) -> list[str]:
        return list(self.grids)

    def for_algorithm(self, algorithm: str) -> SearchSpace:
        used = discovery.CONSUMES[algorithm]
        return SearchSpace({k: v for k, v in self.grids.items() if k in used})


def evaluate_config(algorithm: str, dataset: Dataset, params: dict, seed: int) -> float:
    try:
        return accuracy(discovery.estimate(algorithm, dataset, params, seed), dataset)
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        log.warning("evaluation failed for %s %s: %s", algorithm, params, exc)
        return FAILED


def _evaluate_task(args):
    return evaluate_config(*args)


def _map(tasks, jobs):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(_evaluate_task, tasks))
    return [_evaluate_task(t) for t in tasks]


@dataclass
class TraceEntry:
    cycle: int
    parameter: str | None
    params: dict
    accuracy: float


@dataclass
class SearchResult:
    best_params: dict
    best_accuracy: float
    trace: list[TraceEntry]
    cycles: int


def alternating_optimize(algorithm: str, dataset: Dataset, space: SearchSpace | None = None,
                         seed: int = 0, initial: dict | None = None, max_cycles: int = 10,
                         jobs: int = 1) -> SearchResult:
    """Coordinate-wise grid search on accuracy against the dataset's ground truth.

    Parameters are visited in the space's declared order; each is set to its
    best grid value with the others held fixed. A tie keeps the current value
    when it is on the grid, otherwise the first best grid value is taken. So a
    start on the grid is never made worse. Failed evaluations never win.
    Stops after a cycle that changes nothing, or after ``max_cycles``.
    """
    space = (space or SearchSpace()).for_algorithm(algorithm)
    current = discovery.resolve_params(initial)
    cache: dict[tuple, float] = {}

    def key(p):
        return tuple(sorted((k, p[k]) for k in discovery.CONSUMES[algorithm]))

    best = evaluate_config(algorithm, dataset, current, seed)
    cache[key(current)] = best
    trace = [TraceEntry(0, None, dict(current), best)]
    cycles = 0
    for cycle in range(1, max_cycles + 1):
        cycles = cycle
        changed = False
        for name in space.order:
            candidates = [dict(current, **{name: v}) for v in space.grids[name]]
            todo = [c for c in candidates if key(c) not in cache]
            for c, acc in zip(todo, _map([(algorithm, dataset, c, seed) for c in todo], jobs)):
                cache[key(c)] = acc
            scores = [cache[key(c)] for c in candidates]
            for c, acc in zip(candidates, scores):
                trace.append(TraceEntry(cycle, name, c, acc))
            valid = [(acc, c) for acc, c in zip(scores, candidates) if acc != FAILED]
            if not valid:
                continue
            top = max(acc for acc, _ in valid)
            tied = [c for acc, c in valid if acc == top]
            if any(c[name] == current[name] for c in tied):
                continue
            current, best, changed = tied[0], top, True
        if not changed:
            break
    return SearchResult(current, best, trace, cycles)


@dataclass
class CrossMatrix:
    names: list[str]
    cells: np.ndarray  # [optimized-for, applied-to], NaN where a run failed

    @property
    def mean(self) -> np.ndarray:
        return np.nanmean(self.cells, axis=0)

    @property
    def std(self) -> np.ndarray:
        return np.nanstd(self.cells, axis=0)

    @property
    def max(self) -> np.ndarray:
        return np.nanmax(self.cells, axis=0)

    def write_csv(self, path) -> None:
        def fmt(x):
            return "invalid" if math.isnan(x) else repr(float(x))
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["optimized_for", *self.names])
            for name, row in zip(self.names, self.cells):
                w.writerow([name, *map(fmt, row)])
            for label, row in (("Mean", self.mean), ("Std", self.std), ("Max", self.max)):
                w.writerow([label, *map(fmt, row)])


def cross_apply(algorithm: str, configs: list[dict], datasets: list[Dataset],
                names: list[str] | None = None, seed: int = 0, jobs: int = 1) -> CrossMatrix:
    """Accuracy of the config tuned on dataset i when run on dataset j."""
    if len(configs) != len(datasets):
        raise ValueError("need one config per dataset")
    names = names or [f"dataset{i}" for i in range(len(datasets))]
    tasks = [(algorithm, ds, cfg, seed) for cfg in configs for ds in datasets]
    accs = np.array(_map(tasks, jobs), dtype=float).reshape(len(configs), len(datasets))
    accs[accs == FAILED] = np.nan
    return CrossMatrix(names, accs)


def sensitivity_sweep(algorithm: str, dataset: Dataset, base: dict | None, parameter: str,
                      grid, seed: int = 0, jobs: int = 1) -> list[tuple[float, float]]:
    """Accuracy at each grid value of ``parameter`` with everything else at ``base``."""
    base = discovery.resolve_params(base)
    if parameter not in base:
        raise ValueError(f"unknown parameter {parameter!r}")
    grid = list(grid)
    tasks = [(algorithm, dataset, dict(base, **{parameter: v}), seed) for v in grid]
    return list(zip(grid, _map(tasks, jobs)))
