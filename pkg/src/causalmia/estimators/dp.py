"""Upper bound on the ROC of any attack against an (eps, delta)-DP trainer."""

from __future__ import annotations

import numpy as np

from .roc import RocCurve

__all__ = ["dp_roc_bound", "dp_tpr_ceiling", "bound_excess"]


def dp_tpr_ceiling(fpr, eps: float, delta: float) -> np.ndarray:
    """Largest TPR compatible with ``(eps, delta)``-DP at each FPR.

    ``min(1, e^eps x + delta, 1 - e^-eps (1 - delta - x))``
    """
    if eps < 0 or not 0 <= delta <= 1:
        raise ValueError("need eps >= 0 and delta in [0, 1]")
    x = np.asarray(fpr, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("fpr values must lie in [0, 1]")
    lin = np.exp(eps) * x + delta
    mirrored = 1.0 - np.exp(-eps) * (1.0 - delta - x)
    return np.minimum(1.0, np.minimum(lin, mirrored))


def dp_roc_bound(eps: float, delta: float, n_grid: int = 1001) -> tuple[np.ndarray, np.ndarray]:
    """The bound sampled on a uniform FPR grid, as ``(x, y)``."""
    if n_grid < 2:
        raise ValueError("n_grid must be >= 2")
    x = np.linspace(0.0, 1.0, n_grid)
    return x, dp_tpr_ceiling(x, eps, delta)


def bound_excess(curve: RocCurve, eps: float, delta: float, n_grid: int = 1001) -> float:
    """Largest amount by which ``curve`` rises above the DP ceiling (<= 0 if never)."""
    x, y = dp_roc_bound(eps, delta, n_grid)
    return float(np.max(curve.tpr_at(x) - y))
