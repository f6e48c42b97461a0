"""Latent truth discovery with a one-hidden-unit restricted Boltzmann machine.

Every source is a visible unit, the hidden unit is the truth of the fact being
presented. A reliability model (tpr, fpr, prevalence) and the RBM weights are
two parameterizations of the same thing, so training can start from prior
beliefs about the sources and the learned weights read back as rates.

Facts that only some sources claim are handled with a virtual sub-network: the
hidden bias is split into a global part plus one part per source, and a fact
only sees the parts of the sources that claimed it.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .claims import Dataset
from .reliability import DELTA, ReliabilityModel, logit, sigmoid

log = logging.getLogger(__name__)

_LO, _HI = logit(DELTA), logit(1.0 - DELTA)


class TrainingError(RuntimeError):
    def __init__(self, message: str, epoch: int, batch: int):
        self.epoch, self.batch = epoch, batch
        super().__init__(f"{message} (epoch {epoch}, batch {batch})")


def _softplus(x):
    return np.logaddexp(0.0, x)


@dataclass(eq=False)
class RbmParameters:
    a: np.ndarray
    w: np.ndarray
    b_global: float
    b_source: np.ndarray

    @property
    def hidden_bias(self) -> float:
        return float(self.b_global + self.b_source.sum())

    @property
    def n_sources(self) -> int:
        return len(self.a)

    def copy(self) -> RbmParameters:
        return RbmParameters(self.a.copy(), self.w.copy(), float(self.b_global),
                             self.b_source.copy())

    def __eq__(self, other):
        return (isinstance(other, RbmParameters)
                and np.array_equal(self.a, other.a) and np.array_equal(self.w, other.w)
                and self.b_global == other.b_global
                and np.array_equal(self.b_source, other.b_source))


def source_bias(a: np.ndarray, w: np.ndarray) -> np.ndarray:
    """log(1 - tpr) - log(1 - fpr) written in terms of the weights."""
    return _softplus(a) - _softplus(a + w)


def model_to_rbm(m: ReliabilityModel) -> RbmParameters:
    a = logit(m.fpr)
    w = logit(m.tpr) - a
    b_source = np.log1p(-m.tpr) - np.log1p(-m.fpr)
    return RbmParameters(np.atleast_1d(a), np.atleast_1d(w), logit(m.prevalence),
                         np.atleast_1d(b_source))


def rbm_to_model(r: RbmParameters) -> ReliabilityModel:
    return ReliabilityModel(expit(r.a + r.w), expit(r.a), sigmoid(r.b_global))


def plausibility(r: RbmParameters, sources, values) -> float:
    """P(h = 1 | claims) for one fact claimed by ``sources`` with polarities ``values``.

    Sources that did not claim the fact contribute neither their weight nor
    their share of the hidden bias. With no claims this is the prior prevalence.
    """
    sources = np.asarray(sources, dtype=int)
    values = np.asarray(values, dtype=float)
    return sigmoid(r.b_global + r.b_source[sources].sum() + values @ r.w[sources])


def fact_activations(r: RbmParameters, dataset: Dataset) -> np.ndarray:
    """Hidden pre-activation b_G + sum_{s in S_f} (b_s + v_s w_s) for every fact."""
    src = dataset.claim_source
    return r.b_global + dataset.fact_sum(r.b_source[src] + dataset.claim_value * r.w[src])


_P_LO, _P_HI = np.finfo(float).tiny, np.nextafter(1.0, 0.0)


def _log_odds(p) -> np.ndarray:
    # only exact 0 and 1 are pulled in; a wider clamp would flatten confident values
    p = np.clip(np.asarray(p, dtype=float), _P_LO, _P_HI)
    return np.log(p) - np.log1p(-p)


def adjust_categorical(p) -> np.ndarray:
    """Renormalize per-value plausibilities of one attribute so they sum to one.

    Each value's odds p / (1 - p) is divided by the attribute's total odds;
    this keeps the ranking of the values.
    """
    z = np.atleast_1d(_log_odds(p))
    e = np.exp(z - z.max())
    return e / e.sum()


def segment_softmax(z: np.ndarray, groups: np.ndarray, n_groups: int) -> np.ndarray:
    m = np.full(n_groups, -np.inf)
    np.maximum.at(m, groups, z)
    e = np.exp(z - m[groups])
    return e / np.bincount(groups, weights=e, minlength=n_groups)[groups]


def adjust_dataset(p: np.ndarray, dataset: Dataset) -> np.ndarray:
    """Vectorized :func:`adjust_categorical` over every attribute of ``dataset``."""
    return segment_softmax(_log_odds(p), dataset.fact_attr, dataset.n_attributes)


def categorical_plausibility(r: RbmParameters, sources, votes) -> np.ndarray:
    """Adjusted plausibility of every claimed value of one attribute.

    ``votes`` has one row per value and one column per source in ``sources``
    (the sources claiming the attribute); entry 1 means that source claimed
    that value. Returns the softmax of the per-value activations.
    """
    sources = np.asarray(sources, dtype=int)
    votes = np.atleast_2d(np.asarray(votes, dtype=float))
    t = r.b_global + r.b_source[sources].sum() + votes @ r.w[sources]
    e = np.exp(t - t.max())
    return e / e.sum()


@dataclass
class TruthEstimate:
    plausibility: np.ndarray
    adjusted: np.ndarray | None = None
    unclaimed: np.ndarray | None = None
    algorithm: str = ""

    def scores(self) -> np.ndarray:
        return self.adjusted if self.adjusted is not None else self.plausibility

    def winners(self, dataset: Dataset) -> np.ndarray:
        """Fact index of the highest-scoring value per attribute (-1 if none).

        Ties go to the lowest value id, which is the first fact of the attribute.
        """
        s = self.scores()
        out = np.full(dataset.n_attributes, -1, dtype=np.int64)
        for a in range(dataset.n_attributes):
            lo, hi = dataset.attr_ptr[a], dataset.attr_ptr[a + 1]
            if hi > lo:
                out[a] = lo + int(np.argmax(s[lo:hi]))
        return out


def estimate_from_rbm(r: RbmParameters, dataset: Dataset, algorithm: str = "rbm") -> TruthEstimate:
    t = fact_activations(r, dataset)
    p = expit(t)
    adjusted = None
    if dataset.is_categorical:
        adjusted = segment_softmax(t, dataset.fact_attr, dataset.n_attributes)
    return TruthEstimate(p, adjusted, np.diff(dataset.fact_ptr) == 0, algorithm)


# --------------------------------------------------------------------------
# training

@dataclass
class TrainConfig:
    initial_model: ReliabilityModel | None = None
    learning_rate: float = 0.01
    learning_rate_decay: float = 0.5
    minibatch_size: int = 32
    max_epochs: int = 100
    tolerance: float = 1e-4
    rng_seed: int = 0
    categorical_mode: bool = False
    # used when initial_model is None
    init_tpr: float = 0.8
    init_fpr: float = 0.2
    init_prevalence: float = 0.5

    def __post_init__(self):
        if self.learning_rate < 0 or self.learning_rate_decay < 0:
            raise ValueError("learning rate and decay must be non-negative")
        if self.minibatch_size < 1 or self.max_epochs < 1:
            raise ValueError("minibatch_size and max_epochs must be positive")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")

    def model_for(self, n_sources: int) -> ReliabilityModel:
        if self.initial_model is not None:
            if self.initial_model.n_sources != n_sources:
                raise ValueError(f"initial model has {self.initial_model.n_sources} sources, "
                                 f"dataset has {n_sources}")
            return self.initial_model
        return ReliabilityModel.uniform(n_sources, self.init_tpr, self.init_fpr,
                                        self.init_prevalence)

    def learning_rate_at(self, epoch: int) -> float:
        return self.learning_rate * math.exp(-self.learning_rate_decay * epoch)


@dataclass
class _EpochLayout:
    """Claims of one epoch reordered so every minibatch is a contiguous slice."""

    src: np.ndarray
    val: np.ndarray
    claim_seg: np.ndarray   # position of the claim's fact in epoch order
    fact_group: np.ndarray  # attribute position in epoch order (categorical mode)
    fact_bounds: np.ndarray
    claim_bounds: np.ndarray


def _layout(dataset: Dataset, rng: np.random.Generator, batch: int,
            categorical: bool) -> _EpochLayout:
    counts = np.diff(dataset.fact_ptr)
    if categorical:
        omega = np.diff(dataset.attr_ptr)
        attrs = np.flatnonzero(omega > 0)
        attrs = attrs[rng.permutation(len(attrs))]
        sizes = omega[attrs]
        facts = np.repeat(dataset.attr_ptr[attrs] - np.cumsum(sizes) + sizes, sizes) \
            + np.arange(sizes.sum())
        fact_group = np.repeat(np.arange(len(attrs)), sizes)
        # attributes are never split across minibatches
        starts = np.cumsum(sizes) - sizes
        first = np.flatnonzero(np.diff(starts // batch, prepend=-1))
        fact_bounds = np.append(starts[first], sizes.sum())
    else:
        facts = np.flatnonzero(counts > 0)
        facts = facts[rng.permutation(len(facts))]
        fact_group = np.arange(len(facts))
        fact_bounds = np.append(np.arange(0, len(facts), batch), len(facts))
    lens = counts[facts]
    cum = np.cumsum(lens)
    idx = np.repeat(dataset.fact_ptr[facts] - (cum - lens), lens) + np.arange(cum[-1] if len(cum) else 0)
    claim_bounds = np.concatenate([[0], cum])[fact_bounds]
    return _EpochLayout(dataset.claim_source[idx], dataset.claim_value[idx].astype(float),
                        np.repeat(np.arange(len(facts)), lens), fact_group,
                        fact_bounds, claim_bounds)


def _hidden_probs(t, groups, n_groups, categorical):
    if categorical:
        return segment_softmax(t, groups, n_groups)
    return expit(t)


def _sample_hidden(p, groups, n_groups, categorical, rng):
    if not categorical:
        return (rng.random(len(p)) < p).astype(float)
    # one true value per attribute, drawn from the adjusted plausibilities
    u = rng.random(n_groups)
    c = np.cumsum(p)
    group_start = np.flatnonzero(np.diff(groups, prepend=-1))
    base = (c - p)[group_start]
    cg = c - base[groups]
    last = np.append(group_start[1:], len(p)) - 1
    cg[last] = np.inf
    hit = cg > u[groups]
    prev = np.empty_like(hit)
    prev[0] = False
    prev[1:] = hit[:-1] & (groups[1:] == groups[:-1])
    return (hit & ~prev).astype(float)


def _fit(dataset: Dataset, cfg: TrainConfig, categorical: bool):
    if dataset.n_claims == 0:
        raise ValueError("dataset has no claims")
    if categorical and not dataset.is_categorical:
        raise ValueError("categorical training needs a categorical dataset")
    r = model_to_rbm(cfg.model_for(dataset.n_sources))
    a, w, b_g = r.a.copy(), r.w.copy(), float(r.b_global)
    b_s = source_bias(a, w)
    n_s = dataset.n_sources
    rng = np.random.default_rng(cfg.rng_seed)

    for epoch in range(cfg.max_epochs):
        lr = cfg.learning_rate_at(epoch)
        lay = _layout(dataset, rng, cfg.minibatch_size, categorical)
        a0, w0, bg0 = a.copy(), w.copy(), b_g
        for k in range(len(lay.fact_bounds) - 1):
            f0, f1 = lay.fact_bounds[k], lay.fact_bounds[k + 1]
            c0, c1 = lay.claim_bounds[k], lay.claim_bounds[k + 1]
            nf = f1 - f0
            src, v = lay.src[c0:c1], lay.val[c0:c1]
            seg = lay.claim_seg[c0:c1] - f0
            grp = lay.fact_group[f0:f1] - lay.fact_group[f0]
            ng = int(grp[-1]) + 1

            bias = b_g + np.bincount(seg, weights=b_s[src], minlength=nf)
            p0 = _hidden_probs(bias + np.bincount(seg, weights=v * w[src], minlength=nf),
                               grp, ng, categorical)
            h0 = _sample_hidden(p0, grp, ng, categorical, rng)
            v1 = (rng.random(len(src)) < expit(a[src] + w[src] * h0[seg])).astype(float)
            p1 = _hidden_probs(bias + np.bincount(seg, weights=v1 * w[src], minlength=nf),
                               grp, ng, categorical)

            ga = np.bincount(src, weights=v - v1, minlength=n_s)
            gw = np.bincount(src, weights=v * p0[seg] - v1 * p1[seg], minlength=n_s)
            gb = (p0 - p1).sum()

            a = np.clip(a + lr * ga / nf, _LO, _HI)
            w = np.clip(a + w + lr * gw / nf, _LO, _HI) - a
            # the per-source bias parts follow the new rates; the global part
            # takes whatever remains of the hidden-bias step
            b_s_new = source_bias(a, w)
            b_g = b_g + lr * gb / nf - (b_s_new - b_s)[src].sum() / nf
            b_s = b_s_new
            if not (np.isfinite(b_g) and np.all(np.isfinite(a)) and np.all(np.isfinite(w))):
                raise TrainingError("non-finite parameter", epoch, k)

        change = max(np.abs(a - a0).max(), np.abs(w - w0).max(), abs(b_g - bg0))
        log.debug("epoch %d lr %.3g max change %.3g", epoch, lr, change)
        if change < cfg.tolerance:
            break

    params = RbmParameters(a, w, b_g, b_s)
    return params, rbm_to_model(params)


def train(dataset: Dataset, cfg: TrainConfig) -> tuple[RbmParameters, ReliabilityModel]:
    """Contrastive-divergence (CD-1) training over minibatches of facts."""
    return _fit(dataset, cfg, categorical=False)


def train_categorical(dataset: Dataset, cfg: TrainConfig) -> tuple[RbmParameters, ReliabilityModel]:
    """CD-1 where the hidden sample picks exactly one value per attribute.

    The draw uses the softmax-adjusted plausibilities of the attribute's values;
    minibatches hold whole attributes.
    """
    return _fit(dataset, cfg, categorical=True)


def discover(dataset: Dataset, cfg: TrainConfig | None = None):
    """Train and infer in one call; returns ``(TruthEstimate, ReliabilityModel)``."""
    cfg = cfg or TrainConfig()
    if cfg.categorical_mode:
        params, model = train_categorical(dataset, cfg)
        return estimate_from_rbm(params, dataset, "rbm-c"), model
    params, model = train(dataset, cfg)
    return estimate_from_rbm(params, dataset, "rbm"), model
