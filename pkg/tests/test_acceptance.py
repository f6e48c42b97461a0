"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line; conftest prints them in the terminal
summary, and running this file directly prints them as they finish.
"""
import hashlib
import json
import time
from dataclasses import asdict

import numpy as np
import pytest

from ltdrbm.discovery import ALGORITHMS, run
from ltdrbm.evaluation import (accuracy, benchmark_runtime, evaluate, group_by_characteristic,
                               synthetic_collection)
from ltdrbm.hyperopt import SearchSpace, alternating_optimize, sensitivity_sweep
from ltdrbm.rbm import (adjust_categorical, categorical_plausibility, model_to_rbm, plausibility,
                        rbm_to_model)
from ltdrbm.reliability import ReliabilityModel, dual_model
from ltdrbm.results import result_payload, sha256
from ltdrbm.synthgen import SynthConfig, generate, write_dataset
from oracles import all_claim_vectors, enumerated_posterior, marginalized_posterior, pearson

RESULTS: list[str] = []


def report(number: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def random_models(seed, count, sizes=(1, 2, 3, 4)):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = sizes[i % len(sizes)]
        out.append(ReliabilityModel(rng.uniform(0.01, 0.99, n), rng.uniform(0.01, 0.99, n),
                                    rng.uniform(0.01, 0.99)))
    return out


# the synthetic family shared by criteria 6 and 9
RECOVERY = dict(n_sources=20, source_accuracy=0.8, accuracy_variability=50, n_attributes=2000,
                copy_probability=0.2)


def test_1_bayes_oracle_equivalence():
    models = random_models(1, 100)
    t0 = time.perf_counter()
    worst = 0.0
    for m in models:
        r = model_to_rbm(m)
        n = m.n_sources
        for v in all_claim_vectors(n):
            got = plausibility(r, range(n), v)
            worst = max(worst, abs(got - enumerated_posterior(m.tpr, m.fpr, m.prevalence,
                                                              dict(enumerate(v)))))
    elapsed = time.perf_counter() - t0
    report(1, worst < 1e-9 and elapsed < 1.0,
           f"Bayes equivalence, 100 models: max |diff| {worst:.2e} (< 1e-9), {elapsed:.3f} s (< 1 s)")


def test_2_bijection_roundtrip():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        m = ReliabilityModel(rng.uniform(0, 1, n), rng.uniform(0, 1, n), rng.uniform(0, 1))
        back = rbm_to_model(model_to_rbm(m))
        worst = max(worst, np.abs(back.tpr - m.tpr).max(), np.abs(back.fpr - m.fpr).max(),
                    abs(back.prevalence - m.prevalence))
    report(2, worst <= 1e-12, f"bijection roundtrip, 1000 clamped models: max |diff| {worst:.2e} (<= 1e-12)")


def test_3_missing_data_restriction():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 7))
        m = ReliabilityModel(rng.uniform(0.01, 0.99, n), rng.uniform(0.01, 0.99, n),
                             rng.uniform(0.01, 0.99))
        r = model_to_rbm(m)
        subset = np.flatnonzero(rng.random(n) < 0.5)
        vals = rng.integers(0, 2, len(subset))
        expected = marginalized_posterior(m.tpr, m.fpr, m.prevalence,
                                          dict(zip(subset.tolist(), vals.tolist())), n)
        worst = max(worst, abs(plausibility(r, subset, vals) - expected))
    report(3, worst < 1e-9, f"restriction to claiming sources, 100 masks: max |diff| {worst:.2e} (< 1e-9)")


def test_4_duality():
    # as stated: P_dual(h=1 | 1-v) = 1 - P(h=1 | v)
    worst_flipped = worst_same = 0.0
    for m in random_models(1, 100):
        r, rd = model_to_rbm(m), model_to_rbm(dual_model(m))
        n = m.n_sources
        for v in all_claim_vectors(n):
            p = plausibility(r, range(n), v)
            flipped = [1 - x for x in v]
            worst_flipped = max(worst_flipped, abs(plausibility(rd, range(n), flipped) - (1 - p)))
            worst_same = max(worst_same, abs(plausibility(rd, range(n), v) - (1 - p)))
    report(4, worst_flipped < 1e-9,
           f"duality P_dual(h=1|1-v) = 1 - P(h=1|v): max |diff| {worst_flipped:.2e} (< 1e-9); "
           f"same-v form P_dual(h=1|v) = 1 - P(h=1|v): max |diff| {worst_same:.2e}")


def test_5_categorical_consistency():
    rng = np.random.default_rng(5)
    worst_form = worst_sum = 0.0
    order_kept = True
    for _ in range(1000):
        n = int(rng.integers(1, 8))
        k = int(rng.integers(1, 7))
        m = ReliabilityModel(rng.uniform(0.01, 0.99, n), rng.uniform(0.01, 0.99, n),
                             rng.uniform(0.01, 0.99))
        r = model_to_rbm(m)
        choice = rng.integers(0, k, n)
        votes = (choice[None, :] == np.arange(k)[:, None]).astype(int)
        soft = categorical_plausibility(r, range(n), votes)
        per_value = np.array([plausibility(r, range(n), votes[c]) for c in range(k)])
        odds = adjust_categorical(per_value)
        worst_form = max(worst_form, np.abs(soft - odds).max())
        worst_sum = max(worst_sum, abs(soft.sum() - 1), abs(odds.sum() - 1))
        top = per_value.max()
        order_kept &= bool(per_value[np.argmax(soft)] == top and per_value[np.argmax(odds)] == top)
    report(5, worst_form < 1e-9 and worst_sum < 1e-9 and order_kept,
           f"categorical consistency, 1000 instances: softmax vs odds {worst_form:.2e}, "
           f"|sum - 1| {worst_sum:.2e} (< 1e-9), argmax kept: {order_kept}")


def test_6_synthetic_recovery():
    t0 = time.perf_counter()
    rbm_acc, mv_acc, tprs, accs, per_dataset_r = [], [], [], [], []
    for seed in range(10):
        ds, profiles = generate(SynthConfig(rng_seed=600 + seed, **RECOVERY))
        est, model = run("rbm", ds, seed=seed)
        rbm_acc.append(accuracy(est, ds))
        mv_acc.append(accuracy(run("majority", ds)[0], ds))
        drawn = [p.accuracy for p in profiles]
        tprs += model.tpr.tolist()
        accs += drawn
        per_dataset_r.append(pearson(model.tpr.tolist(), drawn))
    elapsed = time.perf_counter() - t0
    r = pearson(tprs, accs)
    rbm_mean, mv_mean = float(np.mean(rbm_acc)), float(np.mean(mv_acc))
    ok = rbm_mean >= mv_mean - 0.005 and rbm_mean >= 0.85 and r > 0.7 and elapsed < 120
    report(6, ok, f"synthetic recovery, 10 datasets: RBM {rbm_mean:.4f} vs majority {mv_mean:.4f} "
                  f"(>= majority - 0.005, >= 0.85); Pearson(tpr, drawn accuracy) pooled {r:.3f}, "
                  f"per dataset min {min(per_dataset_r):.3f} (> 0.7); {elapsed:.1f} s (< 120 s)")


def _violations(means, direction):
    # adjacent steps that go against the expected direction
    return sum(1 for a, b in zip(means, means[1:]) if direction * (b - a) < 0)


TREND_BINS = 10


def test_7_trends():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    copy_family = [SynthConfig(n_sources=10, n_attributes=200, source_accuracy=0.7,
                               copy_probability=float(rng.uniform(0, 1)), rng_seed=7000 + i)
                   for i in range(600)]
    acc_family = [SynthConfig(n_sources=10, n_attributes=200,
                              source_accuracy=float(rng.uniform(0.5, 0.9)), copy_probability=0.2,
                              rng_seed=8000 + i)
                  for i in range(400)]
    details, ok = [], True
    for family, char, direction in ((copy_family, "copy_frequency", -1),
                                    (acc_family, "avg_source_accuracy", +1)):
        rep = evaluate(synthetic_collection(family), ALGORITHMS, n_bins=TREND_BINS)
        worst = 0
        for alg in ALGORITHMS:
            bins = group_by_characteristic(list(zip(rep.records, rep.accuracies[alg])), char,
                                           TREND_BINS)
            means = [b.mean for b in bins if b.count]
            v = _violations(means, direction)
            worst = max(worst, v)
            ok &= v <= 1
        details.append(f"{char} {'nonincreasing' if direction < 0 else 'nondecreasing'}: "
                       f"worst algorithm has {worst} step(s) against the trend (<= 1)")
    elapsed = time.perf_counter() - t0
    report(7, ok, f"trends over {TREND_BINS} equal-width bins, all algorithms: "
                  + "; ".join(details) + f"; {elapsed:.0f} s")


def test_8_runtime_scaling():
    t0 = time.perf_counter()
    (n4, t4), (n5, t5) = benchmark_runtime("rbm", [10_000, 100_000])
    (_, mv5), = benchmark_runtime("majority", [100_000])
    elapsed = time.perf_counter() - t0
    ratio = t5 / t4
    report(8, ratio < 15 and mv5 < t5 and elapsed < 60,
           f"runtime: RBM {t4:.4f} s at {n4} claims, {t5:.4f} s at {n5} claims, ratio {ratio:.2f} (< 15); "
           f"majority {mv5:.5f} s (< RBM); {elapsed:.1f} s (< 60 s)")


def test_9_fpr_robustness():
    grid = [round(0.05 * i, 2) for i in range(1, 10)]
    rbm_ranges, mle_ranges = [], []
    for seed in range(10):
        ds, _ = generate(SynthConfig(rng_seed=900 + seed, **RECOVERY))
        for alg, out in (("rbm", rbm_ranges), ("mle", mle_ranges)):
            accs = [a for _, a in sensitivity_sweep(alg, ds, {}, "init_fpr", grid, seed)]
            out.append(max(accs) - min(accs))
    rbm_range, mle_range = float(np.mean(rbm_ranges)), float(np.mean(mle_ranges))
    report(9, rbm_range <= mle_range,
           f"initial-fpr sweep {grid[0]}..{grid[-1]}, 10 seeds: mean accuracy range "
           f"RBM {rbm_range:.4f} vs MLE {mle_range:.4f} (RBM <= MLE)")


def _digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


def _dataset_digests(cfg, out_dir):
    ds, profiles = generate(cfg)
    paths = write_dataset(out_dir, cfg, ds, profiles)
    return {name: sha256(p) for name, p in paths.items()}, ds


def test_10_determinism(tmp_path):
    cfg = SynthConfig(n_sources=8, n_attributes=200, copy_probability=0.3, rng_seed=10)
    (g1, ds), (g2, _) = _dataset_digests(cfg, tmp_path / "a"), _dataset_digests(cfg, tmp_path / "b")
    mismatched = [] if g1 == g2 else ["generator"]
    for alg in ALGORITHMS:
        digests = []
        for _ in range(2):
            est, model = run(alg, ds, seed=5)
            digests.append(_digest(result_payload(alg, ds, est, model, {}, 5)))
        if digests[0] != digests[1]:
            mismatched.append(alg)
    space = SearchSpace({"init_tpr": [0.7, 0.9], "init_fpr": [0.1, 0.3]})
    for alg in ("rbm", "mle"):
        a, b = (alternating_optimize(alg, ds, space, seed=5) for _ in range(2))
        if _digest([asdict(e) for e in a.trace]) != _digest([asdict(e) for e in b.trace]):
            mismatched.append(f"sweep:{alg}")
        s1, s2 = (sensitivity_sweep(alg, ds, {}, "init_fpr", [0.1, 0.3], 5) for _ in range(2))
        if _digest(s1) != _digest(s2):
            mismatched.append(f"sensitivity:{alg}")
    data = synthetic_collection([cfg])
    r1, r2 = (evaluate(data, ALGORITHMS, seed=5).to_dict() for _ in range(2))
    for r in (r1, r2):
        r.pop("runtime_seconds")
    if _digest(r1) != _digest(r2):
        mismatched.append("evaluation")
    report(10, not mismatched,
           f"determinism: generator, {len(ALGORITHMS)} algorithms, 2 sweeps, 2 sensitivity runs "
           f"and one evaluation re-run with identical digests"
           + (f"; mismatched: {', '.join(mismatched)}" if mismatched else ""))


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-s"]))
