"""Adaptive-softmin TSK fuzzy classifiers with gated feature selection and rule extraction."""

from .core import (
    ada_softmin_firing,
    adaptive_exponent,
    fixed_softmin,
    gate_derivative,
    gate_value,
    gaussian_membership,
    legacy_gate_value,
    product_firing,
)
from .data import Dataset, kfold_split, load_bundled, load_csv, one_hot
from .model import GateBank, TSKModel, forward, mse_loss
from .pipeline import FittedClassifier, cross_validate, run_pipeline
from .rulebase import build_coco, build_enfrb, build_fuco, place_centers
from .training import TrainConfig, lse_consequents

__version__ = "0.1.0"
