"""Classical and causal membership-inference metrics."""

from .classical import (
    ate_dim,
    auc_pairwise,
    classical_roc,
    exceedance_quantile,
    hoeffding_halfwidth,
    tpr_at_fpr,
)
from .dp import bound_excess, dp_roc_bound, dp_tpr_ceiling
from .outcome import (
    OutcomeModel,
    aipw_ate,
    aipw_fpr_curve,
    fit_outcome_model,
    g_formula_ate,
    g_formula_fpr_curve,
    oracle_outcome_model,
    threshold_grid,
)
from .report import AIPW, CLASSICAL, ESTIMATOR_KINDS, GFORMULA, IPW, MetricsReport, evaluate
from .roc import RocCurve, roc_auc, weighted_roc, youden_sup
from .weighting import ipw_ate, ipw_roc, ipw_tpr_at_fpr, ipw_weights, weighted_quantile

__all__ = [
    "AIPW",
    "CLASSICAL",
    "ESTIMATOR_KINDS",
    "GFORMULA",
    "IPW",
    "MetricsReport",
    "OutcomeModel",
    "RocCurve",
    "aipw_ate",
    "aipw_fpr_curve",
    "ate_dim",
    "auc_pairwise",
    "bound_excess",
    "classical_roc",
    "dp_roc_bound",
    "dp_tpr_ceiling",
    "evaluate",
    "exceedance_quantile",
    "fit_outcome_model",
    "g_formula_ate",
    "g_formula_fpr_curve",
    "hoeffding_halfwidth",
    "ipw_ate",
    "ipw_roc",
    "ipw_tpr_at_fpr",
    "ipw_weights",
    "oracle_outcome_model",
    "roc_auc",
    "threshold_grid",
    "tpr_at_fpr",
    "weighted_quantile",
    "weighted_roc",
    "youden_sup",
]
