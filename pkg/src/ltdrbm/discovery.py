"""One entry point for every algorithm, driven by a flat parameter dict."""
from __future__ import annotations

from dataclasses import fields

from .baselines import BaselineConfig, ltm_gibbs, majority_voting, mle_em, two_estimates
from .claims import Dataset
from .rbm import TrainConfig, TruthEstimate, discover

ALGORITHMS = ("rbm", "rbm-c", "majority", "mle", "ltm", "2est")

# hyperparameters each algorithm actually reads
CONSUMES = {
    "rbm": ("init_tpr", "init_fpr", "init_prevalence", "learning_rate", "learning_rate_decay"),
    "rbm-c": ("init_tpr", "init_fpr", "init_prevalence", "learning_rate", "learning_rate_decay"),
    "majority": (),
    "mle": ("init_tpr", "init_fpr", "init_prevalence"),
    "ltm": ("init_tpr", "init_fpr", "init_prevalence"),
    "2est": ("lambda_steps",),
}

DEFAULTS = {
    "init_tpr": 0.8,
    "init_fpr": 0.2,
    "init_prevalence": 0.5,
    "learning_rate": 0.01,
    "learning_rate_decay": 0.5,
    "minibatch_size": 32,
    "max_epochs": 100,
    "lambda_steps": 10,
}


class UnknownAlgorithm(ValueError):
    pass


def _pick(cls, params: dict, **extra):
    names = {f.name for f in fields(cls)}
    kw = {k: v for k, v in params.items() if k in names}
    kw.update(extra)
    return cls(**kw)


def resolve_params(params: dict | None) -> dict:
    out = dict(DEFAULTS)
    out.update(params or {})
    return out


def validate(params: dict) -> None:
    """Raise ValueError if ``params`` cannot configure the algorithms."""
    _pick(TrainConfig, params)
    _pick(BaselineConfig, params)


def run(algorithm: str, dataset: Dataset, params: dict | None = None, seed: int = 0):
    """Run ``algorithm`` on ``dataset``; returns ``(TruthEstimate, model or error rates or None)``."""
    if algorithm not in ALGORITHMS:
        raise UnknownAlgorithm(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")
    params = resolve_params(params)
    if algorithm in ("rbm", "rbm-c"):
        cfg = _pick(TrainConfig, params, rng_seed=seed, categorical_mode=algorithm == "rbm-c")
        return discover(dataset, cfg)
    if algorithm == "majority":
        return majority_voting(dataset), None
    cfg = _pick(BaselineConfig, params, algorithm=algorithm, rng_seed=seed)
    if algorithm == "mle":
        return mle_em(dataset, cfg)
    if algorithm == "ltm":
        return ltm_gibbs(dataset, cfg)
    return two_estimates(dataset, cfg)


def estimate(algorithm: str, dataset: Dataset, params: dict | None = None,
             seed: int = 0) -> TruthEstimate:
    return run(algorithm, dataset, params, seed)[0]
