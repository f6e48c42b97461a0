"""Comparison algorithms: majority voting, MLE (EM), LTM (collapsed Gibbs), 2-Estimates."""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .claims import Dataset
from .rbm import TruthEstimate
from .reliability import DELTA, ReliabilityModel, posterior


@dataclass
class BaselineConfig:
    algorithm: str = ""
    init_tpr: float = 0.8
    init_fpr: float = 0.2
    init_prevalence: float = 0.5
    # LTM Beta prior strengths (sum of the two pseudo-counts); means come from init_*
    tpr_strength: float = 100.0
    fpr_strength: float = 1010.0
    prevalence_strength: float = 10.0
    gibbs_iterations: int = 50
    burn_in: int = 10
    lambda_steps: int = 10
    tolerance: float = 1e-6
    max_iterations: int = 100
    rng_seed: int = 0
    # MLE starting point; when None, every source starts at init_tpr / init_fpr
    initial_model: ReliabilityModel | None = None

    def __post_init__(self):
        if min(self.tpr_strength, self.fpr_strength, self.prevalence_strength) <= 0:
            raise ValueError("prior pseudo-counts must be positive")
        if self.lambda_steps < 1 or self.gibbs_iterations < 1 or self.max_iterations < 1:
            raise ValueError("step and iteration counts must be at least 1")
        if not 0 <= self.burn_in < self.gibbs_iterations:
            raise ValueError("burn_in must be smaller than gibbs_iterations")

    def model_for(self, n_sources: int) -> ReliabilityModel:
        if self.initial_model is not None:
            if self.initial_model.n_sources != n_sources:
                raise ValueError(f"initial model has {self.initial_model.n_sources} sources, "
                                 f"dataset has {n_sources}")
            return self.initial_model
        return ReliabilityModel.uniform(n_sources, self.init_tpr, self.init_fpr,
                                        self.init_prevalence)


def majority_voting(dataset: Dataset) -> TruthEstimate:
    n = np.diff(dataset.fact_ptr)
    pos = dataset.fact_sum(dataset.claim_value)
    p = np.where(n > 0, pos / np.maximum(n, 1), 0.5)
    return TruthEstimate(p, None, n == 0, "majority")


# --------------------------------------------------------------------------
# MLE

def mle_em(dataset: Dataset, cfg: BaselineConfig | None = None,
           callback=None) -> tuple[TruthEstimate, ReliabilityModel]:
    """EM over per-source (tpr, fpr) and the prevalence.

    Missing claims stay missing: a source's rates are re-estimated only from
    the facts it actually claimed.
    """
    cfg = cfg or BaselineConfig()
    model = cfg.model_for(dataset.n_sources)
    src, v = dataset.claim_source, dataset.claim_value.astype(float)
    n_s = dataset.n_sources
    claimed = np.diff(dataset.fact_ptr) > 0
    for _ in range(cfg.max_iterations):
        p = posterior(model, dataset)
        if callback is not None:
            callback(p)
        pc = p[dataset.claim_fact]
        num_t = np.bincount(src, weights=pc * v, minlength=n_s)
        den_t = np.bincount(src, weights=pc, minlength=n_s)
        num_f = np.bincount(src, weights=(1 - pc) * v, minlength=n_s)
        den_f = np.bincount(src, weights=1 - pc, minlength=n_s)
        with np.errstate(invalid="ignore", divide="ignore"):
            tpr = np.where(den_t > 0, num_t / den_t, model.tpr)
            fpr = np.where(den_f > 0, num_f / den_f, model.fpr)
        prevalence = p[claimed].mean() if claimed.any() else model.prevalence
        new = ReliabilityModel(tpr, fpr, prevalence)
        change = max(np.abs(new.tpr - model.tpr).max(), np.abs(new.fpr - model.fpr).max(),
                     abs(new.prevalence - model.prevalence))
        model = new
        if change < cfg.tolerance:
            break
    p = posterior(model, dataset)
    return TruthEstimate(p, None, ~claimed, "mle"), model


# --------------------------------------------------------------------------
# LTM

@numba.njit(cache=True)
def _ltm_sweeps(fact_ptr, src, val, truth, counts, alpha, beta, uniforms, burn_in, hits):
    n_facts = len(fact_ptr) - 1
    for it in range(uniforms.shape[0]):
        for f in range(n_facts):
            lo, hi = fact_ptr[f], fact_ptr[f + 1]
            if lo == hi:
                continue
            t = truth[f]
            for c in range(lo, hi):
                counts[src[c], t, val[c]] -= 1
            lp0 = np.log(beta[0])
            lp1 = np.log(beta[1])
            for c in range(lo, hi):
                s, o = src[c], val[c]
                lp0 += np.log((counts[s, 0, o] + alpha[0, o])
                              / (counts[s, 0, 0] + counts[s, 0, 1] + alpha[0, 0] + alpha[0, 1]))
                lp1 += np.log((counts[s, 1, o] + alpha[1, o])
                              / (counts[s, 1, 0] + counts[s, 1, 1] + alpha[1, 0] + alpha[1, 1]))
            p1 = 1.0 / (1.0 + np.exp(lp0 - lp1))
            t = 1 if uniforms[it, f] < p1 else 0
            truth[f] = t
            for c in range(lo, hi):
                counts[src[c], t, val[c]] += 1
            if it >= burn_in:
                hits[f] += t


def ltm_gibbs(dataset: Dataset, cfg: BaselineConfig | None = None) -> tuple[TruthEstimate, ReliabilityModel]:
    """Latent Truth Model with collapsed Gibbs sampling.

    Each source has Beta priors on its sensitivity and false positive rate and
    each fact a Beta prior on being true; all are integrated out, leaving only
    the per-fact truth labels to sample. Chains start from the majority vote.
    """
    cfg = cfg or BaselineConfig()
    rng = np.random.default_rng(cfg.rng_seed)
    alpha = np.array([
        [(1 - cfg.init_fpr) * cfg.fpr_strength, cfg.init_fpr * cfg.fpr_strength],
        [(1 - cfg.init_tpr) * cfg.tpr_strength, cfg.init_tpr * cfg.tpr_strength],
    ])
    beta = np.array([1 - cfg.init_prevalence, cfg.init_prevalence]) * cfg.prevalence_strength
    alpha, beta = np.maximum(alpha, DELTA), np.maximum(beta, DELTA)

    src = dataset.claim_source.astype(np.int64)
    val = dataset.claim_value.astype(np.int64)
    truth = (majority_voting(dataset).plausibility > 0.5).astype(np.int64)
    counts = np.zeros((dataset.n_sources, 2, 2), dtype=np.float64)
    np.add.at(counts, (src, truth[dataset.claim_fact], val), 1)
    uniforms = rng.random((cfg.gibbs_iterations, dataset.n_facts))
    hits = np.zeros(dataset.n_facts)
    _ltm_sweeps(dataset.fact_ptr.astype(np.int64), src, val, truth, counts, alpha, beta,
                uniforms, cfg.burn_in, hits)

    claimed = np.diff(dataset.fact_ptr) > 0
    p = np.where(claimed, hits / (cfg.gibbs_iterations - cfg.burn_in),
                 beta[1] / beta.sum())
    tpr = (counts[:, 1, 1] + alpha[1, 1]) / (counts[:, 1].sum(axis=1) + alpha[1].sum())
    fpr = (counts[:, 0, 1] + alpha[0, 1]) / (counts[:, 0].sum(axis=1) + alpha[0].sum())
    prevalence = p[claimed].mean() if claimed.any() else beta[1] / beta.sum()
    return TruthEstimate(p, None, ~claimed, "ltm"), ReliabilityModel(tpr, fpr, prevalence)


# --------------------------------------------------------------------------
# 2-Estimates

def _normalize(x: np.ndarray, lam: float) -> np.ndarray:
    # Affine rescale onto [0, 1], blended with its rounding by weight lam.
    # The published method describes the rescale and the rounding as two
    # alternatives; the blend with a weight that falls from 1 to 0 is how the
    # decreasing lambda is applied here.
    lo, hi = x.min(), x.max()
    lin = (x - lo) / (hi - lo) if hi > lo else np.full_like(x, 0.5)
    return lam * lin + (1 - lam) * np.round(lin)


def two_estimates(dataset: Dataset, cfg: BaselineConfig | None = None):
    """Alternate truth scores of facts and error rates of sources.

    Returns ``(TruthEstimate, error_rates)``. The scores in the estimate are the
    raw (un-normalized) truth values of the last iteration. With
    ``lambda_steps == 1`` the normalization weight stays at 1, i.e. no schedule.
    """
    cfg = cfg or BaselineConfig()
    if not dataset.is_categorical:
        raise ValueError("2-Estimates needs a categorical dataset")
    src, v = dataset.claim_source, dataset.claim_value.astype(float)
    fact = dataset.claim_fact
    n_s = dataset.n_sources
    n_f = np.diff(dataset.fact_ptr)
    n_src = np.bincount(src, minlength=n_s)
    claimed = n_f > 0
    # initial error rate per source
    err = np.full(n_s, 1 - cfg.init_tpr)
    steps = cfg.lambda_steps
    raw = np.zeros(dataset.n_facts)
    for k in range(max(cfg.max_iterations, steps)):
        lam = 1.0 if steps == 1 else max(0.0, 1.0 - k / (steps - 1))
        e = err[src]
        score = np.bincount(fact, weights=v * (1 - e) + (1 - v) * e, minlength=dataset.n_facts)
        new_raw = np.where(claimed, score / np.maximum(n_f, 1), 0.0)
        truth = new_raw.copy()
        truth[claimed] = _normalize(new_raw[claimed], lam)
        t = truth[fact]
        e_sum = np.bincount(src, weights=v * (1 - t) + (1 - v) * t, minlength=n_s)
        # error rates are averages of [0, 1] terms already; rescaling them as
        # well would push every below-median source to "always wrong" once
        # the rounding weight takes over
        new_err = np.where(n_src > 0, e_sum / np.maximum(n_src, 1), err)
        change = np.abs(new_raw - raw).max()
        raw, err = new_raw, new_err
        if k >= steps - 1 and change < cfg.tolerance:
            break
    est = TruthEstimate(np.clip(raw, 0.0, 1.0), None, ~claimed, "2est")
    return est, err
