"""Source reliability models and the closed-form Bayes posterior over a fact."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

DELTA = 1e-6


def sigmoid(x):
    """Logistic function; accepts scalars or arrays and never overflows."""
    out = expit(x)
    return float(out) if np.ndim(out) == 0 else out


def logit(p):
    p = np.asarray(p, dtype=float)
    out = np.log(p) - np.log1p(-p)
    return float(out) if out.ndim == 0 else out


def clamp(p, delta: float = DELTA):
    return np.clip(p, delta, 1.0 - delta)


@dataclass(eq=False)
class ReliabilityModel:
    """Per-source true/false positive rates plus the prior prevalence of true facts.

    Rates are clamped into ``[DELTA, 1 - DELTA]`` on construction.
    """

    tpr: np.ndarray
    fpr: np.ndarray
    prevalence: float

    def __post_init__(self):
        self.tpr = clamp(np.atleast_1d(np.asarray(self.tpr, dtype=float))).copy()
        self.fpr = clamp(np.atleast_1d(np.asarray(self.fpr, dtype=float))).copy()
        if self.tpr.shape != self.fpr.shape:
            raise ValueError("tpr and fpr must have one entry per source")
        self.prevalence = float(clamp(float(self.prevalence)))

    @classmethod
    def uniform(cls, n_sources: int, tpr: float = 0.8, fpr: float = 0.2,
                prevalence: float = 0.5) -> ReliabilityModel:
        return cls(np.full(n_sources, tpr), np.full(n_sources, fpr), prevalence)

    @property
    def n_sources(self) -> int:
        return len(self.tpr)

    def restrict(self, sources) -> ReliabilityModel:
        """Sub-model over ``sources`` only."""
        sources = np.asarray(sources, dtype=int)
        return ReliabilityModel(self.tpr[sources], self.fpr[sources], self.prevalence)

    def __eq__(self, other):
        return (isinstance(other, ReliabilityModel)
                and np.array_equal(self.tpr, other.tpr)
                and np.array_equal(self.fpr, other.fpr)
                and self.prevalence == other.prevalence)


def dual_model(m: ReliabilityModel) -> ReliabilityModel:
    """Model explaining the same claims with the hidden truth inverted."""
    return ReliabilityModel(m.fpr.copy(), m.tpr.copy(), 1.0 - m.prevalence)


def claim_log_odds(model: ReliabilityModel, sources, values) -> np.ndarray:
    """Log likelihood ratio P(v|t=1)/P(v|t=0) contributed by each claim."""
    tpr, fpr = model.tpr[sources], model.fpr[sources]
    values = np.asarray(values)
    return np.where(values == 1, np.log(tpr) - np.log(fpr),
                    np.log1p(-tpr) - np.log1p(-fpr))


def posterior(model: ReliabilityModel, dataset) -> np.ndarray:
    """P(t_f = 1 | claims on f) for every fact, using only the sources claiming f.

    Facts without claims get the prior prevalence.
    """
    llr = claim_log_odds(model, dataset.claim_source, dataset.claim_value)
    return expit(logit(model.prevalence) + dataset.fact_sum(llr))
