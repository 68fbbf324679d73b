"""Propensity-score models: logistic fits, cross-fitting, clipping, diagnostics."""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.special import expit, log_expit

logger = logging.getLogger(__name__)

__all__ = [
    "PropensityModel",
    "FoldPlan",
    "LogisticFitConfig",
    "constant_propensity",
    "fit_logistic",
    "make_fold_plan",
    "cross_fit",
    "clip",
    "odds",
    "delta_pi",
]

SEPARATION_LIMIT = 1e3


@dataclass(frozen=True)
class PropensityModel:
    """Map ``features -> pi_hat(features)`` in ``[floor, ceiling]``.

    ``kind`` is ``"oracle"``, ``"logistic"`` or ``"constant"``. Oracle and
    logistic models are affine in log-odds with ``weights = [intercept, w...]``;
    a constant model stores its value in ``weights[0]`` as a probability.
    """

    kind: str
    weights: np.ndarray
    ceiling: float = 1.0
    floor: float = 0.0
    provenance: str = ""
    converged: bool = True
    separated: bool = False
    n_iter: int = 0

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if self.kind not in ("oracle", "logistic", "constant"):
            raise ValueError(f"unknown propensity kind {self.kind!r}")
        if not 0.0 < self.ceiling <= 1.0:
            raise ValueError("ceiling must lie in (0, 1]")
        if not 0.0 <= self.floor < self.ceiling:
            raise ValueError("floor must lie in [0, ceiling)")

    def raw(self, features) -> np.ndarray:
        x = np.atleast_2d(np.asarray(features, dtype=float))
        if not np.all(np.isfinite(x)):
            raise ValueError("non-finite feature vector")
        if self.kind == "constant":
            return np.full(x.shape[0], float(self.weights[0]))
        if x.shape[1] != self.weights.shape[0] - 1:
            raise ValueError(
                f"feature dim {x.shape[1]} != model dim {self.weights.shape[0] - 1}"
            )
        return expit(self.weights[0] + x @ self.weights[1:])

    def log_odds(self, features) -> np.ndarray:
        x = np.atleast_2d(np.asarray(features, dtype=float))
        if self.kind == "constant":
            p = float(self.weights[0])
            return np.full(x.shape[0], np.log(p) - np.log1p(-p))
        return self.weights[0] + x @ self.weights[1:]

    def __call__(self, features) -> np.ndarray:
        return np.clip(self.raw(features), self.floor, self.ceiling)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "weights": self.weights.tolist(),
            "ceiling": self.ceiling,
            "floor": self.floor,
            "provenance": self.provenance,
            "converged": self.converged,
            "separated": self.separated,
            "n_iter": self.n_iter,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "PropensityModel":
        return cls(
            kind=doc["kind"],
            weights=np.asarray(doc["weights"], dtype=float),
            ceiling=float(doc.get("ceiling", 1.0)),
            floor=float(doc.get("floor", 0.0)),
            provenance=doc.get("provenance", ""),
            converged=bool(doc.get("converged", True)),
            separated=bool(doc.get("separated", False)),
            n_iter=int(doc.get("n_iter", 0)),
        )

    @classmethod
    def from_json(cls, text: str) -> "PropensityModel":
        return cls.from_dict(json.loads(text))


def constant_propensity(p: float) -> PropensityModel:
    if not 0.0 <= p <= 1.0:
        raise ValueError("constant propensity must lie in [0, 1]")
    return PropensityModel("constant", np.array([p]), provenance=f"constant:{p}")


def odds(p) -> np.ndarray:
    """``p / (1 - p)``; raises when a probability equals one."""
    p = np.asarray(p, dtype=float)
    if np.any(p >= 1.0):
        raise ValueError("propensity of 1 gives an infinite IPW weight; clip first")
    return p / (1.0 - p)


@dataclass(frozen=True)
class LogisticFitConfig:
    max_iter: int = 100
    tol: float = 1e-8
    l2: float = 0.0
    seed: Optional[int] = None


def _objective(z, y, l2, w):
    # summed cross-entropy on logits z plus ridge on the non-intercept weights
    return -np.sum(y * log_expit(z) + (1 - y) * log_expit(-z)) + 0.5 * l2 * (
        w[1:] @ w[1:]
    )


def fit_logistic(
    member_x,
    nonmember_x,
    max_iter: int = 100,
    tol: float = 1e-8,
    seed=None,
    *,
    l2: float = 0.0,
) -> PropensityModel:
    """Fit ``P(member | x)`` by damped Newton iterations.

    Features are standardised internally and the transform is folded back into
    the returned weights. Convergence is declared when the gradient of the
    mean cross-entropy has norm at most ``tol``. ``l2`` adds
    ``l2/2 * |w|^2`` (intercept excluded, standardised scale) to the summed
    loss. If a standardised weight exceeds ``1e3`` the data are treated as
    separated: iteration stops and the model carries ``separated=True``.
    Without a penalty, a fit that classifies every record to within ``1e-6``
    is flagged the same way.
    ``seed`` is recorded for provenance only (the fit is deterministic).
    """
    xm = np.atleast_2d(np.asarray(member_x, dtype=float))
    x0 = np.atleast_2d(np.asarray(nonmember_x, dtype=float))
    if xm.shape[0] == 0 or x0.shape[0] == 0:
        raise ValueError("both member and non-member sets must be non-empty")
    if xm.shape[1] != x0.shape[1]:
        raise ValueError("member and non-member feature dims differ")
    x = np.vstack([xm, x0])
    y = np.concatenate([np.ones(len(xm)), np.zeros(len(x0))])
    n, d = x.shape

    mean = x.mean(axis=0)
    sd = x.std(axis=0)
    sd[sd == 0] = 1.0
    xs = np.hstack([np.ones((n, 1)), (x - mean) / sd])

    w = np.zeros(d + 1)
    w[0] = np.log(y.mean()) - np.log1p(-y.mean())
    penalty = np.full(d + 1, l2)
    penalty[0] = 0.0
    z = xs @ w
    obj = _objective(z, y, l2, w)
    converged = separated = False
    it = 0
    for it in range(1, max_iter + 1):
        p = expit(z)
        grad = xs.T @ (p - y) + penalty * w
        if np.linalg.norm(grad) / n <= tol:
            converged = True
            it -= 1
            break
        s = p * (1 - p)
        hess = (xs * s[:, None]).T @ xs
        hess[np.diag_indices_from(hess)] += penalty
        # Levenberg damping keeps the solve defined on (near-)singular Hessians
        damp = 1e-10 * max(1.0, np.trace(hess) / (d + 1))
        hess[np.diag_indices_from(hess)] += damp
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = grad / max(np.trace(hess), 1.0)
        t = 1.0
        while True:
            w_new = w - t * step
            z_new = xs @ w_new
            obj_new = _objective(z_new, y, l2, w_new)
            if obj_new <= obj or t < 1e-10:
                break
            t *= 0.5
        if t < 1e-10 and obj_new > obj:
            # Newton direction failed: plain gradient step
            w_new = w - grad / max(np.linalg.norm(grad), 1.0) * 1e-3
            z_new = xs @ w_new
            obj_new = _objective(z_new, y, l2, w_new)
        w, z, obj = w_new, z_new, obj_new
        if np.max(np.abs(w[1:])) > SEPARATION_LIMIT:
            separated = True
            break
    if not separated and l2 == 0.0 and np.max(np.abs(expit(z) - y)) < 1e-6:
        # the unpenalised optimum is at infinity; the gradient test stopped early
        separated = True
    if separated:
        warnings.warn(
            "logistic propensity fit looks separated; clip before weighting",
            RuntimeWarning,
            stacklevel=2,
        )
    elif not converged:
        logger.info("logistic fit stopped at max_iter=%d", max_iter)

    slope = w[1:] / sd
    intercept = w[0] - slope @ mean
    return PropensityModel(
        kind="logistic",
        weights=np.concatenate([[intercept], slope]),
        provenance=f"logistic n1={len(xm)} n0={len(x0)} l2={l2} seed={seed}",
        converged=converged,
        separated=separated,
        n_iter=it,
    )


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignment: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "assignment", np.asarray(self.assignment, dtype=int))
        if self.k < 2:
            raise ValueError("k must be >= 2")

    def folds(self):
        return [np.flatnonzero(self.assignment == f) for f in range(self.k)]


def make_fold_plan(n: int, k: int = 2, seed=0, labels=None) -> FoldPlan:
    """Random partition of ``range(n)`` into ``k`` folds of near-equal size.

    With ``labels`` the split is stratified so that every fold sees both
    classes whenever each class has at least ``k`` records.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > n:
        raise ValueError("more folds than records")
    if k == n:
        warnings.warn("k equals the number of records: leave-one-out", RuntimeWarning)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), k, n]))
    assignment = np.empty(n, dtype=int)
    if labels is None:
        assignment[rng.permutation(n)] = np.arange(n) % k
    else:
        labels = np.asarray(labels)
        offset = 0
        for value in np.unique(labels):
            idx = np.flatnonzero(labels == value)
            assignment[idx[rng.permutation(len(idx))]] = (np.arange(len(idx)) + offset) % k
            offset += len(idx)
    return FoldPlan(k, assignment, seed)


def cross_fit(features, membership, plan: FoldPlan, fit_cfg: Optional[LogisticFitConfig] = None):
    """Out-of-fold propensity scores.

    Returns ``(pi_hat, models)`` where ``pi_hat[i]`` comes from the model fit
    on every fold except the one holding record ``i``.
    """
    fit_cfg = fit_cfg or LogisticFitConfig()
    x = np.atleast_2d(np.asarray(features, dtype=float))
    a = np.asarray(membership).astype(bool)
    if plan.assignment.shape[0] != x.shape[0]:
        raise ValueError("fold plan does not match the number of records")
    pi_hat = np.empty(x.shape[0])
    models = []
    for f, held in enumerate(plan.folds()):
        train = plan.assignment != f
        if a[train].all() or not a[train].any():
            raise ValueError(f"fold {f}: training complement holds a single class")
        model = fit_logistic(
            x[train & a],
            x[train & ~a],
            fit_cfg.max_iter,
            fit_cfg.tol,
            fit_cfg.seed,
            l2=fit_cfg.l2,
        )
        model = replace(model, provenance=model.provenance + f" fold={f}/{plan.k}")
        models.append(model)
        pi_hat[held] = model(x[held])
    return pi_hat, models


def clip(model: PropensityModel, eta: float) -> PropensityModel:
    """Cap at ``1 - eta`` and floor at ``eta``."""
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    lo, hi = min(eta, 1 - eta), max(eta, 1 - eta)
    return replace(model, floor=lo, ceiling=hi)


def delta_pi(hat: PropensityModel, oracle: PropensityModel, nonmember_sample) -> float:
    """Mean absolute odds difference over a non-member sample."""
    x = getattr(nonmember_sample, "features", nonmember_sample)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[0] == 0:
        raise ValueError("empty non-member sample")
    return float(np.mean(np.abs(odds(oracle(x)) - odds(hat(x)))))
