"""Outcome-regression (G-formula) and doubly robust (AIPW) estimators."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.stats import norm

from ..attacks import MEMBER_HIGH, RAW_LOSS
from ..propensity import fit_logistic
from ..protocols import EvidenceSet
from ..synthgen import ProblemSpec
from ..trainers import ModelParams
from .roc import RocCurve, _augment
from .weighting import ipw_weights

__all__ = [
    "OutcomeModel",
    "oracle_outcome_model",
    "fit_outcome_model",
    "threshold_grid",
    "g_formula_ate",
    "aipw_ate",
    "g_formula_fpr_curve",
    "aipw_fpr_curve",
]


@dataclass(frozen=True)
class OutcomeModel:
    """Control-arm outcome regressions.

    ``mean_fn(x)`` estimates ``E[Y(0) | x]`` and ``exceed_fn(x, grid)`` returns
    the ``(len(x), len(grid))`` matrix of ``P(Y(0) >= t | x)``. Both are on the
    score scale of ``orientation``.
    """

    mean_fn: Callable[[np.ndarray], np.ndarray]
    exceed_fn: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    orientation: str = RAW_LOSS
    name: str = "custom"

    def mean(self, features) -> np.ndarray:
        out = np.asarray(self.mean_fn(np.atleast_2d(features)), dtype=float)
        if not np.all(np.isfinite(out)):
            raise ValueError("outcome model produced non-finite predictions")
        return out

    def exceedance(self, features, grid) -> np.ndarray:
        """``P(Y(0) >= t | x)`` on an ascending grid, forced non-increasing in ``t``."""
        if self.exceed_fn is None:
            raise ValueError(f"outcome model {self.name!r} has no threshold family")
        grid = np.asarray(grid, dtype=float)
        if np.any(np.diff(grid) <= 0):
            raise ValueError("threshold grid must be strictly increasing")
        probs = np.clip(np.asarray(self.exceed_fn(np.atleast_2d(features), grid), dtype=float), 0, 1)
        return np.minimum.accumulate(probs, axis=1)

    def oriented(self, orientation: str) -> "OutcomeModel":
        """Same regressions on the negated score scale (continuous outcomes)."""
        if orientation == self.orientation:
            return self
        mean_fn, exceed_fn = self.mean_fn, self.exceed_fn

        def flipped_exceed(x, grid):
            # P(-Y >= t) = P(Y <= -t) = 1 - P(Y >= -t) for continuous Y
            back = exceed_fn(x, -grid[::-1])[:, ::-1]
            return 1.0 - back

        return OutcomeModel(
            mean_fn=lambda x: -mean_fn(x),
            exceed_fn=None if exceed_fn is None else flipped_exceed,
            orientation=orientation,
            name=self.name,
        )


def oracle_outcome_model(
    spec: ProblemSpec,
    model: ModelParams,
    orientation: str = RAW_LOSS,
    *,
    loo=None,
) -> OutcomeModel:
    """Exact law of the control outcome given the features ``a``.

    For ``b = a'w + s*eps`` and a model ``theta`` that never saw the record,
    the residual is ``N(m, s^2)`` with ``m = a'(theta - w)``, so the loss is a
    scaled non-central chi-square with mean ``m^2 + s^2``.

    A training record shaped ``theta`` itself, so plugging ``theta`` in for it
    understates its control loss. ``loo = (train_features, loo_predictions)``
    supplies ``a_i'theta_{-i}`` for those records (see
    :func:`~causalmia.trainers.ridge_loo_predictions`); rows are matched on
    their exact feature bytes.
    """
    theta, w = model.weights, spec.teacher
    s = spec.label_noise_sd
    if not s > 0:
        raise ValueError("oracle outcome law needs positive label noise")
    lookup = {}
    if loo is not None:
        feats, preds = loo
        feats = np.atleast_2d(np.asarray(feats, dtype=float))
        if len(feats) != len(preds):
            raise ValueError("loo features and predictions disagree in length")
        lookup = {row.tobytes(): float(p) for row, p in zip(feats, preds)}

    def shift(x):
        pred = x @ theta
        if lookup:
            pred = np.array([lookup.get(row.tobytes(), p) for row, p in zip(x, pred)])
        return pred - x @ w

    def loss_exceed(x, grid):
        m = shift(x)[:, None]
        r = np.sqrt(np.clip(grid, 0, None))[None, :]
        p = norm.sf((r - m) / s) + norm.cdf((-r - m) / s)
        return np.where(grid[None, :] <= 0, 1.0, p)

    def loss_below(x, grid):
        # P(L <= u) with u = -t
        u = -grid
        m = shift(x)[:, None]
        r = np.sqrt(np.clip(u, 0, None))[None, :]
        p = norm.cdf((r - m) / s) - norm.cdf((-r - m) / s)
        return np.where(u[None, :] <= 0, 0.0, p)

    if orientation == RAW_LOSS:
        return OutcomeModel(
            mean_fn=lambda x: shift(x) ** 2 + s * s,
            exceed_fn=loss_exceed,
            orientation=RAW_LOSS,
            name="oracle",
        )
    return OutcomeModel(
        mean_fn=lambda x: -(shift(x) ** 2 + s * s),
        exceed_fn=loss_below,
        orientation=MEMBER_HIGH,
        name="oracle",
    )


def fit_outcome_model(
    features,
    y,
    grid=None,
    *,
    l2: float = 1.0,
    orientation: str = RAW_LOSS,
    max_iter: int = 50,
    feature_map: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> OutcomeModel:
    """Linear mean regression plus one logistic fit per grid threshold.

    Fit on non-member records only. Thresholds where every label agrees get a
    constant 0 or 1 curve. ``feature_map`` transforms covariates before both
    fitting and prediction; a balancing score such as the propensity log-odds
    is a valid low-dimensional choice.
    """
    fmap = feature_map or (lambda v: v)

    def design_of(v):
        v = np.atleast_2d(v)
        return np.asarray(fmap(v), dtype=float).reshape(len(v), -1)

    x = design_of(features)
    y = np.asarray(y, dtype=float)
    n, d = x.shape
    design = np.hstack([np.ones((n, 1)), x])
    reg = l2 * np.eye(d + 1)
    reg[0, 0] = 0.0
    coef = np.linalg.solve(design.T @ design + reg, design.T @ y)

    grid_fit = threshold_grid(y) if grid is None else np.asarray(grid, dtype=float)
    params = []
    for t in grid_fit:
        above = y >= t
        if above.all() or not above.any():
            params.append(float(above.all()))
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            m = fit_logistic(x[above], x[~above], max_iter=max_iter, l2=l2)
        params.append(m)

    def exceed_fn(xq, grid):
        xq = design_of(xq)
        cols = []
        for t in grid:
            k = int(np.clip(np.searchsorted(grid_fit, t), 0, len(grid_fit) - 1))
            if k > 0 and abs(grid_fit[k - 1] - t) < abs(grid_fit[k] - t):
                k -= 1
            p = params[k]
            cols.append(np.full(len(xq), p) if isinstance(p, float) else p.raw(xq))
        return np.column_stack(cols)

    return OutcomeModel(
        mean_fn=lambda xq: coef[0] + design_of(xq) @ coef[1:],
        exceed_fn=exceed_fn,
        orientation=orientation,
        name="fitted",
    )


def threshold_grid(scores, n_points: int = 101) -> np.ndarray:
    """Up to ``n_points`` thresholds from the minimum to the maximum score.

    Points sit at evenly spaced empirical quantiles, so heavy-tailed losses
    still get resolution where most scores lie.
    """
    s = np.asarray(scores, dtype=float)
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    grid = np.unique(np.quantile(s, np.linspace(0.0, 1.0, n_points)))
    if len(grid) < 2:
        grid = np.array([grid[0], grid[0] + 1.0])
    return grid


def _check_orientation(ev: EvidenceSet, om: OutcomeModel) -> OutcomeModel:
    return om.oriented(ev.orientation)


def g_formula_ate(ev: EvidenceSet, om: OutcomeModel) -> float:
    """Mean over members of ``y - mu0_hat(x)``."""
    ev.require_groups()
    om = _check_orientation(ev, om)
    mem = ev.a == 1
    return float(np.mean(ev.y[mem] - om.mean(ev.features[mem])))


def aipw_ate(ev: EvidenceSet, pi, om: OutcomeModel) -> float:
    """G-formula plus the odds-weighted non-member residual correction (divided by ``n1``)."""
    ev.require_groups()
    om = _check_orientation(ev, om)
    g = g_formula_ate(ev, om)
    w = ipw_weights(ev, pi)
    non = ev.a == 0
    resid = ev.y[non] - om.mean(ev.features[non])
    return float(g - np.sum(w * resid) / ev.n1)


def _curve(ev: EvidenceSet, om: OutcomeModel, pi, grid) -> RocCurve:
    ev.require_groups()
    om = _check_orientation(ev, om)
    grid = threshold_grid(ev.y) if grid is None else np.asarray(grid, dtype=float)
    mem = ev.a == 1
    y1 = ev.y[mem]
    if grid[0] > y1.min() or grid[-1] < y1.max():
        warnings.warn("threshold grid does not cover the member score range", RuntimeWarning)
    mu_members = om.exceedance(ev.features[mem], grid)
    fpr = mu_members.sum(axis=0)
    if pi is not None:
        non = ev.a == 0
        w = ipw_weights(ev, pi)
        hit = ev.y[non][:, None] >= grid[None, :]
        mu_non = om.exceedance(ev.features[non], grid)
        fpr = fpr + w @ (hit - mu_non)
    fpr = fpr / ev.n1
    tpr = np.mean(y1[:, None] >= grid[None, :], axis=0)
    # descending thresholds -> increasing rates; AIPW needs a monotone, [0,1] repair
    fpr = np.maximum.accumulate(np.clip(fpr[::-1], 0.0, 1.0))
    tpr = tpr[::-1]
    thr = grid[::-1]
    fpr, tpr, thr = _augment(fpr, tpr, thr)
    return RocCurve(fpr, tpr, thr)


def g_formula_fpr_curve(ev: EvidenceSet, om: OutcomeModel, pi=None, grid=None) -> RocCurve:
    """Causal ROC with the FPR arm from ``mean_i mu0_t(x_i)`` over members.

    Passing a propensity ``pi`` adds the AIPW correction term.
    """
    return _curve(ev, om, pi, grid)


def aipw_fpr_curve(ev: EvidenceSet, pi, om: OutcomeModel, grid=None) -> RocCurve:
    return _curve(ev, om, pi, grid)
