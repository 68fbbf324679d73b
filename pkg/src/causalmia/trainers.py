"""Training algorithms under attack: closed-form ridge and DP-SGD."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .synthgen import Dataset, LabeledPoint, rng_for

try:  # pragma: no cover - exercised implicitly
    import numba
except ImportError:  # pragma: no cover
    numba = None

__all__ = [
    "ModelParams",
    "TrainerConfig",
    "RIDGE",
    "DPSGD",
    "train_ridge",
    "RidgeUpdater",
    "ridge_loo_predictions",
    "train_dpsgd",
    "train",
    "loss",
    "losses",
    "constant_trainer",
]

RIDGE = "RidgeClosedForm"
DPSGD = "DpSgd"


@dataclass(frozen=True)
class ModelParams:
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if not np.all(np.isfinite(w)):
            raise ValueError("model weights must be finite")
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    def to_csv(self, path) -> None:
        np.savetxt(path, self.weights[:, None], delimiter=",", header="theta", comments="")

    def to_bytes(self) -> bytes:
        return self.weights.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, raw: bytes) -> "ModelParams":
        return cls(np.frombuffer(raw, dtype="<f8").copy())

    @classmethod
    def from_csv(cls, path) -> "ModelParams":
        return cls(np.loadtxt(path, delimiter=",", skiprows=1, ndmin=1))


@dataclass(frozen=True)
class TrainerConfig:
    """Training algorithm settings.

    Ridge uses ``ridge_lambda`` only. DP-SGD uses ``lr``, ``epochs``,
    ``batch_size``, ``clip_norm``, ``noise_sd`` (noise multiplier, the added
    noise has std ``noise_sd * clip_norm`` on the summed batch gradient) and
    ``l2_lambda``. ``dp_epsilon``/``dp_delta`` are labels, never computed.
    """

    variant: str = RIDGE
    ridge_lambda: float = 1e3
    lr: float = 0.01
    epochs: int = 75
    batch_size: int = 128
    clip_norm: float = 1.0
    noise_sd: float = float(np.sqrt(3.0))
    l2_lambda: float = 10.0
    dp_epsilon: Optional[float] = None
    dp_delta: Optional[float] = None

    def __post_init__(self):
        if self.variant not in (RIDGE, DPSGD):
            raise ValueError(f"unknown trainer variant {self.variant!r}")
        if self.variant == RIDGE and not self.ridge_lambda > 0:
            raise ValueError("ridge_lambda must be positive")
        if self.variant == DPSGD:
            if not (self.lr > 0 and self.epochs >= 1 and self.batch_size >= 1):
                raise ValueError("lr, epochs and batch_size must be positive")
            if not self.clip_norm > 0:
                raise ValueError("clip_norm must be positive")
            if self.noise_sd < 0 or self.l2_lambda < 0:
                raise ValueError("noise_sd and l2_lambda must be non-negative")

    def to_dict(self) -> dict:
        doc = asdict(self)
        if np.isinf(doc["clip_norm"]):
            doc["clip_norm"] = "inf"
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainerConfig":
        doc = dict(doc)
        if "clip_norm" in doc:
            doc["clip_norm"] = float(doc["clip_norm"])
        return cls(**doc)

    @classmethod
    def from_json(cls, text: str) -> "TrainerConfig":
        return cls.from_dict(json.loads(text))

    @property
    def fingerprint(self) -> str:
        import hashlib

        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


def train_ridge(data: Dataset, lam: float) -> ModelParams:
    """Minimise ``sum_i (a_i'theta - b_i)^2 + lam |theta|^2``.

    Solved in the dual, ``theta = A'(AA' + lam I)^-1 b``, when ``d > n`` and
    through the primal normal equations otherwise.
    """
    if len(data) == 0:
        raise ValueError("cannot train on an empty dataset")
    if not lam > 0:
        raise ValueError("lambda must be positive")
    a, b = data.features, data.labels
    n, d = a.shape
    if d > n:
        gram = a @ a.T
        gram[np.diag_indices_from(gram)] += lam
        theta = a.T @ cho_solve(cho_factor(gram), b)
    else:
        gram = a.T @ a
        gram[np.diag_indices_from(gram)] += lam
        theta = cho_solve(cho_factor(gram), a.T @ b)
    grad = 2 * (a.T @ (a @ theta - b)) + 2 * lam * theta
    assert np.linalg.norm(grad) <= 1e-6 * (1 + np.linalg.norm(theta)) * max(
        1.0, np.linalg.norm(a) ** 2
    ), "ridge system solved inaccurately"
    return ModelParams(theta)


def ridge_loo_predictions(data: Dataset, lam: float) -> np.ndarray:
    """Prediction ``a_i'theta_{-i}`` of the ridge fit that left record ``i`` out.

    Uses the closed form ``b_i - alpha_i / [K^-1]_ii`` with
    ``K = AA' + lam I`` and ``alpha = K^-1 b``, so all ``n`` leave-one-out
    fits cost one ``n x n`` inverse.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    a, b = data.features, data.labels
    gram = a @ a.T
    gram[np.diag_indices_from(gram)] += lam
    k_inv = cho_solve(cho_factor(gram), np.eye(len(b)))
    alpha = k_inv @ b
    return b - alpha / np.diag(k_inv)


class RidgeUpdater:
    """Ridge solutions on ``base`` plus one extra point, without re-solving.

    Adding ``(x, y)`` to the base problem is a rank-one update of the normal
    equations: with ``G = (A'A + lam I)^-1``,
    ``theta' = theta + G x (y - x'theta) / (1 + x'G x)``. ``G x`` is applied
    through the dual Cholesky factor, ``G x = (x - A'(AA' + lam I)^-1 A x) / lam``.
    """

    def __init__(self, base: Dataset, lam: float):
        if not lam > 0:
            raise ValueError("lambda must be positive")
        self.lam = float(lam)
        self.base = base
        self.theta = train_ridge(base, lam).weights if len(base) else np.zeros(base.dim)
        a = base.features
        if len(base):
            gram = a @ a.T
            gram[np.diag_indices_from(gram)] += lam
            self._factor = cho_factor(gram)
        else:
            self._factor = None

    def _apply_inverse(self, x: np.ndarray) -> np.ndarray:
        if self._factor is None:
            return x / self.lam
        a = self.base.features
        return (x - a.T @ cho_solve(self._factor, a @ x)) / self.lam

    def with_point(self, point: LabeledPoint) -> ModelParams:
        x = np.asarray(point.features, dtype=float)
        gx = self._apply_inverse(x)
        resid = point.label - x @ self.theta
        return ModelParams(self.theta + gx * resid / (1.0 + x @ gx))

    def without_point(self) -> ModelParams:
        return ModelParams(self.theta.copy())


def _dpsgd_numpy(a, b, perms, noise, lr, l2, clip_norm, batch_size, hook=None):
    n, d = a.shape
    theta = np.zeros(d)
    step = 0
    for epoch in range(perms.shape[0]):
        order = perms[epoch]
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            x = a[idx]
            r = x @ theta - b[idx]
            grads = 2 * x * r[:, None] + 2 * l2 * theta
            norms = np.linalg.norm(grads, axis=1)
            scale = np.ones_like(norms)
            big = norms > clip_norm
            scale[big] = clip_norm / norms[big]
            grads = grads * scale[:, None]
            if hook is not None:
                hook(grads)
            total = grads.sum(axis=0) + noise[step]
            if not np.all(np.isfinite(total)):
                raise FloatingPointError("non-finite DP-SGD gradient")
            theta = theta - lr * total / len(idx)
            step += 1
    return theta


def _dpsgd_loop(a, b, perms, noise, lr, l2, clip_norm, batch_size):
    # per-example gradient g_i = 2 r_i x_i + 2 l2 theta; its norm is closed-form,
    # so the clipped sum needs no per-example gradient matrix
    n, d = a.shape
    theta = np.zeros(d)
    total = np.zeros(d)
    step = 0
    for epoch in range(perms.shape[0]):
        for start in range(0, n, batch_size):
            stop = min(start + batch_size, n)
            tt = 0.0
            for j in range(d):
                tt += theta[j] * theta[j]
            for j in range(d):
                total[j] = 0.0
            csum = 0.0
            for k in range(start, stop):
                i = perms[epoch, k]
                xt = 0.0
                sq = 0.0
                for j in range(d):
                    xt += a[i, j] * theta[j]
                    sq += a[i, j] * a[i, j]
                r = xt - b[i]
                nrm2 = 4.0 * r * r * sq + 8.0 * l2 * r * xt + 4.0 * l2 * l2 * tt
                nrm = np.sqrt(max(nrm2, 0.0))
                c = 1.0
                if nrm > clip_norm:
                    c = clip_norm / nrm
                csum += c
                for j in range(d):
                    total[j] += 2.0 * c * r * a[i, j]
            m = stop - start
            for j in range(d):
                g = total[j] + 2.0 * l2 * theta[j] * csum + noise[step, j]
                theta[j] -= lr * g / m
            step += 1
    return theta


if numba is not None:
    _dpsgd_kernel = numba.njit(cache=True, nogil=True)(_dpsgd_loop)
else:  # pragma: no cover
    _dpsgd_kernel = None


def train_dpsgd(
    data: Dataset,
    cfg: TrainerConfig,
    seed,
    *,
    backend: str = "auto",
    hook: Optional[Callable[[np.ndarray], None]] = None,
) -> ModelParams:
    """DP-SGD on the l2-regularised squared loss, starting from zero.

    Each epoch walks a fresh permutation in minibatches (the last one may be
    short). Per-example gradients are clipped to ``clip_norm``, summed, and
    Gaussian noise of std ``noise_sd * clip_norm`` is added before dividing by
    the batch size. Permutations and noise come from ``seed``'s generator, so
    both backends see identical randomness. ``hook`` receives every batch's
    clipped per-example gradients and forces the numpy backend.
    """
    if cfg.variant != DPSGD:
        raise ValueError("train_dpsgd needs a DpSgd config")
    n = len(data)
    if cfg.batch_size > n:
        raise ValueError(f"batch_size {cfg.batch_size} exceeds dataset size {n}")
    rng = seed if isinstance(seed, np.random.Generator) else rng_for(seed, "dpsgd")
    steps_per_epoch = -(-n // cfg.batch_size)
    perms = np.stack([rng.permutation(n) for _ in range(cfg.epochs)])
    noise_std = cfg.noise_sd * (cfg.clip_norm if np.isfinite(cfg.clip_norm) else 1.0)
    noise = rng.standard_normal((cfg.epochs * steps_per_epoch, data.dim)) * noise_std
    args = (
        data.features,
        data.labels,
        perms,
        noise,
        float(cfg.lr),
        float(cfg.l2_lambda),
        float(cfg.clip_norm),
        int(cfg.batch_size),
    )
    if hook is not None or backend == "numpy" or _dpsgd_kernel is None:
        with np.errstate(over="ignore", invalid="ignore"):
            theta = _dpsgd_numpy(*args, hook=hook)
    else:
        theta = _dpsgd_kernel(*args)
        if not np.all(np.isfinite(theta)):
            raise FloatingPointError("non-finite DP-SGD gradient")
    return ModelParams(theta)


TrainerLike = Union[TrainerConfig, Callable[[Dataset, object], ModelParams]]


def train(data: Dataset, trainer: TrainerLike, seed=None) -> ModelParams:
    """Dispatch on a :class:`TrainerConfig`, or call a custom trainer."""
    if callable(trainer) and not isinstance(trainer, TrainerConfig):
        return trainer(data, seed)
    if trainer.variant == RIDGE:
        return train_ridge(data, trainer.ridge_lambda)
    return train_dpsgd(data, trainer, seed)


def constant_trainer(theta) -> Callable[[Dataset, object], ModelParams]:
    """Trainer that ignores its data and returns ``theta``."""
    fixed = ModelParams(theta)

    def _train(data, seed=None):
        return fixed

    return _train


def loss(model: ModelParams, point: LabeledPoint) -> float:
    """Unregularised squared error ``(a'theta - b)^2``."""
    x = np.asarray(point.features, dtype=float)
    if x.shape != model.weights.shape:
        raise ValueError(f"point dim {x.shape} != model dim {model.weights.shape}")
    return float((x @ model.weights - point.label) ** 2)


def losses(model: ModelParams, data: Dataset) -> np.ndarray:
    if data.dim != model.dim:
        raise ValueError(f"data dim {data.dim} != model dim {model.dim}")
    return (data.features @ model.weights - data.labels) ** 2
