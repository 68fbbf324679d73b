"""ROC curves built from (optionally weighted) member / non-member scores."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

__all__ = ["RocCurve", "weighted_roc", "roc_auc", "youden_sup"]


@dataclass(frozen=True)
class RocCurve:
    """Points ``(fpr, tpr, threshold)`` ordered by non-decreasing FPR."""

    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray

    def __post_init__(self):
        for name in ("fpr", "tpr", "thresholds"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (self.fpr.shape == self.tpr.shape == self.thresholds.shape):
            raise ValueError("roc arrays must share a shape")
        if len(self.fpr) == 0:
            raise ValueError("empty ROC curve")

    def __len__(self) -> int:
        return len(self.fpr)

    @property
    def points(self) -> list[tuple[float, float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist(), self.thresholds.tolist()))

    @property
    def auc(self) -> float:
        return roc_auc(self)

    def tpr_at(self, fpr_grid) -> np.ndarray:
        """Upper envelope of the curve, linearly interpolated at ``fpr_grid``."""
        fx, idx = np.unique(self.fpr, return_inverse=True)
        top = np.full(len(fx), -np.inf)
        np.maximum.at(top, idx, self.tpr)
        return np.interp(np.asarray(fpr_grid, dtype=float), fx, top)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["fpr", "tpr", "threshold"])
            for f, t, th in zip(self.fpr, self.tpr, self.thresholds):
                writer.writerow([repr(float(f)), repr(float(t)), repr(float(th))])

    @classmethod
    def from_csv(cls, path) -> "RocCurve":
        data = np.genfromtxt(path, delimiter=",", names=True)
        data = np.atleast_1d(data)
        return cls(data["fpr"], data["tpr"], data["threshold"])


def _augment(fpr, tpr, thr):
    if fpr[0] != 0.0 or tpr[0] != 0.0:
        fpr = np.concatenate([[0.0], fpr])
        tpr = np.concatenate([[0.0], tpr])
        thr = np.concatenate([[np.inf], thr])
    if fpr[-1] != 1.0 or tpr[-1] != 1.0:
        fpr = np.concatenate([fpr, [1.0]])
        tpr = np.concatenate([tpr, [1.0]])
        thr = np.concatenate([thr, [-np.inf]])
    return fpr, tpr, thr


def weighted_roc(member_scores, nonmember_scores, nonmember_weights=None) -> RocCurve:
    """ROC swept over every distinct pooled score, highest first.

    TPR counts members with score ``>= t``; FPR is the weight fraction of
    non-members with score ``>= t`` (plain fraction when unweighted).
    """
    s1 = np.asarray(member_scores, dtype=float)
    s0 = np.asarray(nonmember_scores, dtype=float)
    if len(s1) == 0 or len(s0) == 0:
        raise ValueError("both groups need at least one score")
    w0 = np.ones(len(s0)) if nonmember_weights is None else np.asarray(nonmember_weights, dtype=float)
    if np.any(w0 < 0) or not np.all(np.isfinite(w0)):
        raise ValueError("weights must be finite and non-negative")
    if not w0.sum() > 0:
        raise ValueError("total non-member weight is zero")

    thresholds = np.unique(np.concatenate([s1, s0]))[::-1]
    s1_sorted = np.sort(s1)
    tp = len(s1) - np.searchsorted(s1_sorted, thresholds, side="left")
    order = np.argsort(s0)
    s0_sorted = s0[order]
    # weight of non-members with score >= t: suffix sums over ascending scores
    suffix = np.concatenate([np.cumsum(w0[order][::-1])[::-1], [0.0]])
    fp_w = suffix[np.searchsorted(s0_sorted, thresholds, side="left")]
    total = suffix[0]
    tpr = tp / len(s1)
    fpr = np.minimum(fp_w / total, 1.0)
    fpr, tpr, thresholds = _augment(fpr, tpr, thresholds)
    return RocCurve(fpr, tpr, thresholds)


def roc_auc(curve: RocCurve) -> float:
    """Trapezoidal area under the curve."""
    f, t = curve.fpr, curve.tpr
    return float(np.sum(np.diff(f) * (t[1:] + t[:-1]) * 0.5))


def youden_sup(curve: RocCurve) -> float:
    """Largest TPR - FPR gap along the curve."""
    return float(np.max(curve.tpr - curve.fpr))
