"""Empirical stability constants and the deviation bounds built on them.

Both constants are suprema over datasets; here they are maxima over sampled
one-point replacements, i.e. lower-bound estimates.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .synthgen import Dataset, ProblemSpec, rng_for, sample_members
from .trainers import DPSGD, TrainerConfig, losses, train

__all__ = [
    "StabilityEstimate",
    "estimate_error_stability",
    "estimate_training_stability",
    "estimate_stability",
    "theorem_deviation",
]


@dataclass(frozen=True)
class StabilityEstimate:
    """Error (``alpha_hat``) and uniform training (``beta_hat``) stability.

    ``alpha_se``/``beta_se`` are Monte Carlo standard errors over training
    seeds at the maximising perturbation (0 for deterministic trainers).
    """

    alpha_hat: float
    beta_hat: float
    n_perturbations: int
    n_test: int
    trainer_fingerprint: str
    n_train: int = 0
    alpha_se: float = 0.0
    beta_se: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "StabilityEstimate":
        return cls(**json.loads(text))


def _fingerprint(trainer) -> str:
    if isinstance(trainer, TrainerConfig):
        return trainer.fingerprint
    return getattr(trainer, "__qualname__", type(trainer).__name__)


def _randomized(trainer) -> bool:
    return isinstance(trainer, TrainerConfig) and trainer.variant == DPSGD


def _replace(base: Dataset, i: int, fresh: Dataset) -> Dataset:
    feats = base.features.copy()
    labels = base.labels.copy()
    feats[i] = fresh.features[0]
    labels[i] = fresh.labels[0]
    return Dataset(feats, labels)


def _perturbations(spec, trainer, n_train, n_perturb, seed, n_train_seeds, probe):
    """Yield, per replacement, the per-seed loss arrays on ``probe(base, i)`` for D and D'."""
    if n_perturb < 1:
        raise ValueError("n_perturb must be >= 1")
    base = sample_members(spec, n_train, rng_for(seed, "stability", "base"))
    pick = rng_for(seed, "stability", "index")
    n_seeds = n_train_seeds if _randomized(trainer) else 1
    train_seeds = [rng_for(seed, "stability", "train", s).integers(2**63) for s in range(n_seeds)]
    base_models = [train(base, trainer, int(s)) for s in train_seeds]
    for j in range(n_perturb):
        i = int(pick.integers(n_train))
        fresh = sample_members(spec, 1, rng_for(seed, "stability", "fresh", j))
        other = _replace(base, i, fresh)
        target = probe(base, i)
        before = np.array([losses(m, target) for m in base_models])
        after = np.array([losses(train(other, trainer, int(s)), target) for s in train_seeds])
        yield before, after


def _se(diffs: np.ndarray) -> float:
    return float(diffs.std(ddof=1) / math.sqrt(len(diffs))) if len(diffs) > 1 else 0.0


def estimate_error_stability(
    spec: ProblemSpec,
    trainer,
    n_train: int,
    n_perturb: int,
    n_test: int,
    seed=0,
    *,
    n_train_seeds: int = 5,
) -> StabilityEstimate:
    """Max over replacements of the change in mean test loss.

    Randomized trainers average the test loss over ``n_train_seeds`` training
    seeds, shared between ``D`` and ``D'``.
    """
    if n_train < 2:
        raise ValueError("n_train must be >= 2")
    test = sample_members(spec, n_test, rng_for(seed, "stability", "test"))
    best, best_se = 0.0, 0.0
    for before, after in _perturbations(
        spec, trainer, n_train, n_perturb, seed, n_train_seeds, lambda base, i: test
    ):
        per_seed = after.mean(axis=1) - before.mean(axis=1)
        gap = abs(float(per_seed.mean()))
        if gap > best:
            best, best_se = gap, _se(per_seed)
    return StabilityEstimate(best, 0.0, n_perturb, n_test, _fingerprint(trainer), n_train, alpha_se=best_se)


def estimate_training_stability(
    spec: ProblemSpec,
    trainer,
    n_train: int,
    n_perturb: int,
    seed=0,
    *,
    n_train_seeds: int = 5,
) -> StabilityEstimate:
    """Max over replacements and retained training points of the loss change."""
    if n_train < 3:
        raise ValueError("n_train must be >= 3")

    def retained(base, i):
        return base.subset(np.delete(np.arange(len(base)), i))

    best, best_se = 0.0, 0.0
    for before, after in _perturbations(
        spec, trainer, n_train, n_perturb, seed, n_train_seeds, retained
    ):
        diff = after - before  # (seeds, retained points)
        gaps = np.abs(diff.mean(axis=0))
        k = int(np.argmax(gaps))
        if gaps[k] > best:
            best, best_se = float(gaps[k]), _se(diff[:, k])
    return StabilityEstimate(0.0, best, n_perturb, 0, _fingerprint(trainer), n_train, beta_se=best_se)


def estimate_stability(spec, trainer, n_train, n_perturb, n_test, seed=0, *, n_train_seeds=5):
    """Both constants in one :class:`StabilityEstimate`."""
    a = estimate_error_stability(spec, trainer, n_train, n_perturb, n_test, seed, n_train_seeds=n_train_seeds)
    b = estimate_training_stability(spec, trainer, n_train, n_perturb, seed, n_train_seeds=n_train_seeds)
    return StabilityEstimate(
        a.alpha_hat, b.beta_hat, n_perturb, n_test, a.trainer_fingerprint, n_train, a.alpha_se, b.beta_se
    )


def theorem_deviation(
    alpha: float,
    beta: float,
    n: int,
    t: float,
    eta: Optional[float] = None,
    delta_pi: Optional[float] = None,
) -> float:
    """``sqrt(t/n) + sqrt(n t alpha^2) + sqrt(n t beta^2)`` up to an unknown constant C.

    With ``eta`` the first term is divided by the overlap level and
    ``delta_pi`` (propensity error) is added, giving the zero-run form.
    For order-of-magnitude reporting only.
    """
    if not (n > 0 and t > 0):
        raise ValueError("n and t must be positive")
    if alpha < 0 or beta < 0:
        raise ValueError("stability constants must be non-negative")
    first = math.sqrt(t / n)
    if eta is not None:
        if not 0 < eta <= 0.5:
            raise ValueError("eta must lie in (0, 1/2]")
        first /= eta
    out = first + math.sqrt(n * t) * alpha + math.sqrt(n * t) * beta
    if delta_pi is not None:
        out += delta_pi
    return out
