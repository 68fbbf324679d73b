"""Difference-in-means metrics for randomised (multi-run / one-run) evidence."""

from __future__ import annotations

import warnings

import numpy as np

from ..protocols import EvidenceSet
from .roc import RocCurve, weighted_roc

__all__ = [
    "ate_dim",
    "hoeffding_halfwidth",
    "classical_roc",
    "auc_pairwise",
    "tpr_at_fpr",
    "exceedance_quantile",
]


def _groups(ev: EvidenceSet):
    ev.require_groups()
    return ev.y[ev.a == 1], ev.y[ev.a == 0]


def ate_dim(ev: EvidenceSet) -> float:
    """Mean member score minus mean non-member score."""
    y1, y0 = _groups(ev)
    return float(y1.mean() - y0.mean())


def hoeffding_halfwidth(n1: int, n0: int, t: float, *, scores_normalized: bool) -> float:
    """Half-width ``sqrt(2t/n1) + sqrt(2t/n0)`` of the ATE band.

    Holds with probability ``1 - 4 exp(-t)`` for scores in ``[0, 1]``; the caller
    must confirm the scores were normalised.
    """
    if not scores_normalized:
        raise ValueError("Hoeffding band requires scores min-max normalised to [0, 1]")
    if n1 <= 0 or n0 <= 0 or not t > 0:
        raise ValueError("n1, n0 and t must be positive")
    return float(np.sqrt(2 * t / n1) + np.sqrt(2 * t / n0))


def classical_roc(ev: EvidenceSet) -> RocCurve:
    y1, y0 = _groups(ev)
    return weighted_roc(y1, y0)


def auc_pairwise(ev: EvidenceSet) -> float:
    """Fraction of member/non-member pairs ranked correctly, ties counting 1/2."""
    y1, y0 = _groups(ev)
    s0 = np.sort(y0)
    below = np.searchsorted(s0, y1, side="left")
    tied = np.searchsorted(s0, y1, side="right") - below
    # integer and half-integer counts are exact in float64
    wins = float(np.sum(below)) + 0.5 * float(np.sum(tied))
    return wins / (len(y1) * len(y0))


def exceedance_quantile(scores, weights, alpha: float) -> float:
    """Smallest observed score whose weighted exceedance fraction is ``<= alpha``.

    The exceedance fraction at ``t`` is ``sum_i w_i 1{s_i >= t} / sum_i w_i``.
    When no observed score qualifies, the largest one is returned.
    """
    s = np.asarray(scores, dtype=float)
    w = np.asarray(weights, dtype=float)
    if s.shape != w.shape or len(s) == 0:
        raise ValueError("scores and weights must be non-empty and aligned")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and non-negative")
    if not w.sum() > 0:
        raise ValueError("all weights are zero")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if np.all(w == w[0]):
        w = np.ones_like(w)
    order = np.argsort(s, kind="stable")
    s_sorted = s[order]
    suffix = np.concatenate([np.cumsum(w[order][::-1])[::-1], [0.0]])
    values = np.unique(s_sorted)
    mass = suffix[np.searchsorted(s_sorted, values, side="left")] / suffix[0]
    ok = np.flatnonzero(mass <= alpha)
    if len(ok) == 0:
        return float(values[-1])
    return float(values[ok[0]])


def tpr_at_fpr(ev: EvidenceSet, alpha: float) -> float:
    """Member fraction with score at or above the non-member ``1 - alpha`` quantile."""
    y1, y0 = _groups(ev)
    if len(y0) < 1.0 / alpha:
        warnings.warn(
            f"only {len(y0)} non-members for alpha={alpha}; quantile is coarse",
            RuntimeWarning,
            stacklevel=2,
        )
    t = exceedance_quantile(y0, np.ones(len(y0)), alpha)
    return float(np.mean(y1 >= t))
