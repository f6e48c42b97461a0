"""Latent truth discovery with restricted Boltzmann machines."""

__version__ = "0.1.0"

from .claims import Dataset, binarize, from_binary_claims, read_claims_csv, read_truth_csv
from .reliability import ReliabilityModel, dual_model, posterior, sigmoid
from .rbm import (RbmParameters, TrainConfig, TruthEstimate, adjust_categorical,
                  categorical_plausibility, model_to_rbm, plausibility, rbm_to_model, train,
                  train_categorical)

__all__ = [
    "Dataset", "binarize", "from_binary_claims", "read_claims_csv", "read_truth_csv",
    "ReliabilityModel", "dual_model", "posterior", "sigmoid",
    "RbmParameters", "TrainConfig", "TruthEstimate", "adjust_categorical",
    "categorical_plausibility", "model_to_rbm", "plausibility", "rbm_to_model", "train",
    "train_categorical",
]
