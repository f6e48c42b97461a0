"""Random categorical datasets with Beta-distributed sources and copiers."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .claims import Dataset, DatasetStats, binarize, write_claims_csv, write_truth_csv


@dataclass
class SynthConfig:
    n_sources: int = 20
    n_attributes: int = 1000
    values_min: int = 2
    values_max: int = 10
    claim_frequency: float = 0.5
    claim_frequency_variability: float = 10.0
    source_accuracy: float = 0.8
    accuracy_variability: float = 50.0
    copy_probability: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_sources < 1 or self.n_attributes < 1:
            raise ValueError("need at least one source and one attribute")
        if not 1 <= self.values_min <= self.values_max:
            raise ValueError("values per attribute must satisfy 1 <= min <= max")
        if not 0 < self.claim_frequency <= 1:
            raise ValueError("claim_frequency must lie in (0, 1]")
        if not 0 < self.source_accuracy < 1:
            raise ValueError("source_accuracy must lie in (0, 1)")
        if self.claim_frequency_variability <= 0 or self.accuracy_variability <= 0:
            raise ValueError("variabilities must be positive")
        if not 0 <= self.copy_probability <= 1:
            raise ValueError("copy_probability must lie in [0, 1]")

    def beta_params(self, mean: float, variability: float) -> tuple[float, float]:
        # a frequency of exactly 1 leaves no room for a Beta; treat it as near-certain
        mean = min(mean, 1 - 1e-9)
        return mean * variability, (1 - mean) * variability


@dataclass
class SourceProfile:
    claim_frequency: float
    accuracy: float
    copies_from: int | None = None
    copy_frequency: float = 0.0
    n_claims: int = 0
    n_copied: int = 0


def generate(cfg: SynthConfig) -> tuple[Dataset, list[SourceProfile]]:
    """Draw sources, then their claims, then let copiers overwrite part of theirs.

    Sources are generated in order and a copier only copies from an earlier
    source, so the copied claims are final when they are read.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    n_s, n_a = cfg.n_sources, cfg.n_attributes
    omega = rng.integers(cfg.values_min, cfg.values_max + 1, size=n_a)
    truth = (rng.random(n_a) * omega).astype(np.int64)
    freq = rng.beta(*cfg.beta_params(cfg.claim_frequency, cfg.claim_frequency_variability), size=n_s)
    acc = rng.beta(*cfg.beta_params(cfg.source_accuracy, cfg.accuracy_variability), size=n_s)
    copier = rng.random(n_s) < cfg.copy_probability
    copier[0] = False
    target = rng.random(n_s)
    copy_freq = rng.random(n_s)

    profiles: list[SourceProfile] = []
    claims = np.full((n_s, n_a), -1, dtype=np.int64)
    for s in range(n_s):
        claimed = rng.random(n_a) < freq[s]
        correct = rng.random(n_a) < acc[s]
        # uniform over the attribute's false values
        other = (rng.random(n_a) * np.maximum(omega - 1, 1)).astype(np.int64)
        other += other >= truth
        value = np.where(correct | (omega == 1), truth, other)
        row = np.where(claimed, value, -1)
        prof = SourceProfile(float(freq[s]), float(acc[s]))
        copy_draw = rng.random(n_a)
        if copier[s]:
            src = int(target[s] * s)
            prof.copies_from, prof.copy_frequency = src, float(copy_freq[s])
            take = claimed & (copy_draw < copy_freq[s]) & (claims[src] >= 0)
            row[take] = claims[src][take]
            prof.n_copied = int(take.sum())
        prof.n_claims = int(claimed.sum())
        claims[s] = row
        profiles.append(prof)

    s_idx, a_idx = np.nonzero(claims >= 0)
    triples = np.stack([s_idx, a_idx, claims[s_idx, a_idx]], axis=1)
    ds = binarize(triples, n_sources=n_s, n_attributes=n_a)
    ds = Dataset(ds.n_sources, ds.n_facts, ds.fact_ptr, ds.claim_source, ds.claim_value,
                 ds.attr_ptr, ds.fact_value,
                 source_names=[f"s{i}" for i in range(n_s)],
                 fact_names=[f"a{a}=v{v}" for a, v in zip(ds.fact_attr.tolist(),
                                                          ds.fact_value.tolist())],
                 attribute_names=[f"a{i}" for i in range(n_a)],
                 value_names=[f"v{i}" for i in range(cfg.values_max)])
    return ds.with_truth(attr_truth=truth), profiles


def measure_copy_frequency(dataset: Dataset, profiles: list[SourceProfile]) -> float:
    """Fraction of categorical claims that were substituted by a copy."""
    total = sum(p.n_claims for p in profiles)
    return sum(p.n_copied for p in profiles) / total if total else 0.0


def profile_document(cfg: SynthConfig, dataset: Dataset, profiles: list[SourceProfile]) -> dict:
    stats = DatasetStats.of(dataset)
    return {
        "config": asdict(cfg),
        "sources": [dict(name=dataset.source_names[i], **asdict(p))
                    for i, p in enumerate(profiles)],
        "realized": {
            "categorical_claims": sum(p.n_claims for p in profiles),
            "binary_claims": dataset.n_claims,
            "facts": dataset.n_facts,
            "copy_frequency": measure_copy_frequency(dataset, profiles),
            "avg_source_accuracy": stats.avg_source_accuracy,
            "mean_normalized_entropy": stats.mean_entropy,
        },
    }


def write_dataset(out_dir, cfg: SynthConfig, dataset: Dataset,
                  profiles: list[SourceProfile]) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"claims": out / "claims.csv", "truth": out / "truth.csv",
             "profile": out / "profile.json"}
    write_claims_csv(paths["claims"], dataset)
    write_truth_csv(paths["truth"], dataset)
    paths["profile"].write_text(
        json.dumps(profile_document(cfg, dataset, profiles), indent=2, sort_keys=True) + "\n")
    return paths
