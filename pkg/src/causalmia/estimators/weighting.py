"""Inverse-propensity-weighted estimators for confounded (zero-run) evidence.

Non-members are reweighted by the propensity odds ``pi/(1-pi)`` so that their
covariates match the member (target) distribution.
"""

from __future__ import annotations

import numpy as np

from ..protocols import EvidenceSet
from .classical import exceedance_quantile
from .roc import RocCurve, weighted_roc

__all__ = [
    "propensity_values",
    "ipw_weights",
    "ipw_ate",
    "ipw_roc",
    "weighted_quantile",
    "ipw_tpr_at_fpr",
]


def propensity_values(ev: EvidenceSet, pi) -> np.ndarray:
    """Per-record propensities from a model (callable) or a precomputed array."""
    if callable(pi):
        return np.asarray(pi(ev.features), dtype=float)
    values = np.asarray(pi, dtype=float)
    if values.shape != (len(ev),):
        raise ValueError("propensity array must hold one value per record")
    return values


def ipw_weights(ev: EvidenceSet, pi) -> np.ndarray:
    """Odds weights for the non-member records, in record order."""
    p = propensity_values(ev, pi)[ev.a == 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        w = p / (1.0 - p)
    bad = np.flatnonzero(~np.isfinite(w) | (w < 0))
    if len(bad):
        idx = np.flatnonzero(ev.a == 0)[bad[0]]
        raise ValueError(f"non-finite IPW weight at record {idx} (pi={p[bad[0]]!r})")
    return w


def ipw_ate(ev: EvidenceSet, pi, *, self_normalize: bool = False) -> float:
    """Member mean minus odds-weighted non-member mean.

    The control arm is divided by ``n0``; ``self_normalize`` divides by the
    total weight instead, which stays unbiased for unequal group sizes.
    """
    ev.require_groups()
    w = ipw_weights(ev, pi)
    y1 = ev.y[ev.a == 1]
    y0 = ev.y[ev.a == 0]
    denom = w.sum() if self_normalize else len(y0)
    if not denom > 0:
        raise ValueError("total non-member weight is zero")
    return float(y1.mean() - np.sum(w * y0) / denom)


def ipw_roc(ev: EvidenceSet, pi) -> RocCurve:
    """Causal ROC: unweighted member arm, odds-weighted non-member arm."""
    ev.require_groups()
    return weighted_roc(ev.y[ev.a == 1], ev.y[ev.a == 0], ipw_weights(ev, pi))


def weighted_quantile(scores, weights, alpha: float) -> float:
    """Smallest observed score ``t`` with ``sum w 1{s >= t} / sum w <= alpha``."""
    return exceedance_quantile(scores, weights, alpha)


def ipw_tpr_at_fpr(ev: EvidenceSet, pi, alpha: float) -> float:
    """Member exceedance fraction at the odds-weighted non-member quantile."""
    ev.require_groups()
    t = weighted_quantile(ev.y[ev.a == 0], ipw_weights(ev, pi), alpha)
    return float(np.mean(ev.y[ev.a == 1] >= t))

