"""Causal evaluation of membership inference attacks.

Evidence is collected in one of three regimes (multi-run, one-run, zero-run)
and summarised by classical or causal estimators (IPW, G-formula, AIPW).
"""

__version__ = "0.1.0"

from .attacks import MEMBER_HIGH, RAW_LOSS, AttackSpec
from .propensity import PropensityModel, clip, cross_fit, fit_logistic, make_fold_plan
from .protocols import AssignmentMode, EvidenceSet, run_multirun, run_onerun, run_zerorun
from .synthgen import Dataset, ProblemSpec, make_problem, oracle_propensity, sample_members, sample_shifted
from .trainers import DPSGD, RIDGE, ModelParams, TrainerConfig, train

__all__ = [
    "AssignmentMode",
    "AttackSpec",
    "DPSGD",
    "Dataset",
    "EvidenceSet",
    "MEMBER_HIGH",
    "ModelParams",
    "ProblemSpec",
    "PropensityModel",
    "RAW_LOSS",
    "RIDGE",
    "TrainerConfig",
    "clip",
    "cross_fit",
    "fit_logistic",
    "make_fold_plan",
    "make_problem",
    "oracle_propensity",
    "run_multirun",
    "run_onerun",
    "run_zerorun",
    "sample_members",
    "sample_shifted",
    "train",
]
