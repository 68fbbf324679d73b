"""Evidence collection in the multi-run, one-run and zero-run regimes."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .attacks import AttackSpec, MEMBER_HIGH, RAW_LOSS, flip, scores
from .synthgen import Dataset, ProblemSpec, rng_for, sample_members
from .trainers import RIDGE, ModelParams, RidgeUpdater, TrainerConfig, train

logger = logging.getLogger(__name__)

__all__ = [
    "MULTI_RUN",
    "ONE_RUN",
    "ZERO_RUN",
    "BERNOULLI",
    "BALANCED",
    "EvidenceSet",
    "AssignmentMode",
    "run_multirun",
    "run_onerun",
    "run_zerorun",
]

MULTI_RUN = "MultiRun"
ONE_RUN = "OneRun"
ZERO_RUN = "ZeroRun"
BERNOULLI = "Bernoulli"
BALANCED = "BalancedSplit"


@dataclass(frozen=True)
class AssignmentMode:
    mode: str = BALANCED
    p: float = 0.5

    def __post_init__(self):
        if self.mode not in (BERNOULLI, BALANCED):
            raise ValueError(f"unknown assignment mode {self.mode!r}")

    def assign(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.mode == BALANCED:
            if n % 2:
                raise ValueError("BalancedSplit needs an even count")
            return np.repeat(np.array([1, 0], dtype=np.int8), n // 2)
        return (rng.random(n) < self.p).astype(np.int8)


@dataclass(frozen=True)
class EvidenceSet:
    """Triples ``(x_i, a_i, y_i)`` from one protocol run.

    ``features``/``labels`` hold the points, ``a`` the membership bits and ``y``
    the scores in ``orientation``. ``normalized`` marks min-max rescaled scores.
    """

    features: np.ndarray
    labels: np.ndarray
    a: np.ndarray
    y: np.ndarray
    regime: str
    seed: Optional[int] = None
    orientation: str = RAW_LOSS
    normalized: bool = False
    n_trainings: int = 0
    model: Optional[ModelParams] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        a = np.asarray(self.a).astype(np.int8)
        y = np.asarray(self.y, dtype=float)
        x = np.atleast_2d(np.asarray(self.features, dtype=float))
        if not (len(a) == len(y) == x.shape[0] == len(self.labels)):
            raise ValueError("evidence arrays disagree in length")
        if not np.all(np.isfinite(y)):
            raise ValueError("evidence scores must be finite")
        if not np.all((a == 0) | (a == 1)):
            raise ValueError("membership bits must be 0 or 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=float))

    def __len__(self) -> int:
        return len(self.y)

    @property
    def n1(self) -> int:
        return int(np.sum(self.a == 1))

    @property
    def n0(self) -> int:
        return int(np.sum(self.a == 0))

    @property
    def members(self) -> np.ndarray:
        return self.a == 1

    def require_groups(self) -> None:
        if self.n1 == 0:
            raise ValueError("evidence has no members (a=1 group is empty)")
        if self.n0 == 0:
            raise ValueError("evidence has no non-members (a=0 group is empty)")

    def oriented(self, orientation: str) -> "EvidenceSet":
        if orientation == self.orientation:
            return self
        if self.normalized:
            y = 1.0 - self.y
        else:
            y = flip(self.y, self.orientation, orientation)
        return replace(self, y=y, orientation=orientation)

    def normalize(self) -> "EvidenceSet":
        """Min-max rescale scores into ``[0, 1]`` and set the flag."""
        lo, hi = self.y.min(), self.y.max()
        span = hi - lo
        y = np.zeros_like(self.y) if span == 0 else (self.y - lo) / span
        return replace(self, y=y, normalized=True)

    def feature_hashes(self) -> list[str]:
        return [
            hashlib.sha1(
                np.concatenate([row, [lab]]).astype("<f8").tobytes()
            ).hexdigest()[:16]
            for row, lab in zip(self.features, self.labels)
        ]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "a", "y", "feature_hash"])
            for i, (a, y, h) in enumerate(zip(self.a, self.y, self.feature_hashes())):
                writer.writerow([i, int(a), repr(float(y)), h])

    def to_dict(self, dump_features: bool = False) -> dict:
        doc = {
            "regime": self.regime,
            "seed": self.seed,
            "orientation": self.orientation,
            "normalized": self.normalized,
            "n1": self.n1,
            "n0": self.n0,
            "n_trainings": self.n_trainings,
            "a": self.a.tolist(),
            "y": self.y.tolist(),
        }
        if dump_features:
            doc["features"] = self.features.tolist()
            doc["labels"] = self.labels.tolist()
        return doc

    def to_json(self, dump_features: bool = False) -> str:
        return json.dumps(self.to_dict(dump_features))

    @classmethod
    def from_dict(cls, doc: dict) -> "EvidenceSet":
        n = len(doc["y"])
        feats = np.asarray(doc.get("features", np.zeros((n, 0))), dtype=float)
        labels = np.asarray(doc.get("labels", np.zeros(n)), dtype=float)
        return cls(
            features=feats.reshape(n, -1),
            labels=labels,
            a=np.asarray(doc["a"]),
            y=np.asarray(doc["y"], dtype=float),
            regime=doc["regime"],
            seed=doc.get("seed"),
            orientation=doc.get("orientation", RAW_LOSS),
            normalized=bool(doc.get("normalized", False)),
            n_trainings=int(doc.get("n_trainings", 0)),
        )

    @classmethod
    def from_json(cls, text: str) -> "EvidenceSet":
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_csv(cls, path, regime: str = "Unknown", orientation: str = RAW_LOSS) -> "EvidenceSet":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        n = len(rows)
        return cls(
            features=np.zeros((n, 0)),
            labels=np.zeros(n),
            a=np.array([int(r["a"]) for r in rows]),
            y=np.array([float(r["y"]) for r in rows]),
            regime=regime,
            orientation=orientation,
        )


def _scored(attack: AttackSpec, model: ModelParams, data: Dataset) -> np.ndarray:
    return scores(attack, model, data)


def _train_or_zero(data: Dataset, trainer, seed) -> ModelParams:
    # an empty training set leaves only the penalty, whose minimiser is zero
    if len(data) == 0:
        return ModelParams(np.zeros(data.dim))
    return train(data, trainer, seed)


def _multirun_one(i, spec, trainer, attack, base, bit, seed, updater):
    rng = rng_for(seed, "run", i)
    point = sample_members(spec, 1, rng)
    if updater is not None:
        theta = updater.with_point(point[0]) if bit else updater.without_point()
    else:
        data = base.concat(point) if bit else base
        theta = _train_or_zero(data, trainer, rng_for(seed, "train", i))
    return point, float(_scored(attack, theta, point)[0])


def run_multirun(
    spec: ProblemSpec,
    trainer,
    attack: AttackSpec,
    base_train_size: int,
    n_eval: int,
    mode: AssignmentMode = AssignmentMode(),
    seed=0,
    *,
    n_jobs: int = 1,
    fast_ridge: bool = True,
) -> EvidenceSet:
    """One fresh training per evaluation point.

    A base set ``D`` of ``base_train_size`` target points is drawn once. Run
    ``i`` draws ``X_i`` from the target law, trains on ``D + {X_i}`` when
    ``a_i = 1`` and on ``D`` otherwise, and scores ``X_i``. Every run owns the
    generator ``(seed, "run", i)``, so runs are order-independent.
    With ``BalancedSplit`` the first half of the runs are members.
    Ridge configs use an exact rank-one update of the base solution
    (``fast_ridge``).
    """
    if n_eval < 2:
        raise ValueError("n_eval must be >= 2")
    base = sample_members(spec, base_train_size, rng_for(seed, "base")) if base_train_size else Dataset.empty(spec.dim)
    bits = mode.assign(n_eval, rng_for(seed, "assign"))
    updater = None
    if fast_ridge and isinstance(trainer, TrainerConfig) and trainer.variant == RIDGE:
        updater = RidgeUpdater(base, trainer.ridge_lambda)

    args = [(i, spec, trainer, attack, base, int(bits[i]), seed, updater) for i in range(n_eval)]
    if n_jobs != 1 and updater is None:
        from joblib import Parallel, delayed

        results = Parallel(n_jobs=n_jobs)(delayed(_multirun_one)(*arg) for arg in args)
    else:
        results = []
        for arg in args:
            try:
                results.append(_multirun_one(*arg))
            except Exception as exc:
                raise RuntimeError(f"multi-run training failed at run {arg[0]}") from exc

    points = [r[0] for r in results]
    return EvidenceSet(
        features=np.vstack([p.features for p in points]),
        labels=np.concatenate([p.labels for p in points]),
        a=bits,
        y=np.array([r[1] for r in results]),
        regime=MULTI_RUN,
        seed=None if seed is None else int(seed),
        orientation=attack.orientation,
        n_trainings=n_eval,
    )


def run_onerun(
    spec: ProblemSpec,
    trainer,
    attack: AttackSpec,
    n: int,
    mode: AssignmentMode = AssignmentMode(),
    seed=0,
    *,
    base: Optional[Dataset] = None,
) -> EvidenceSet:
    """Single training on the included candidates (plus an optional base set).

    Every candidate is scored against that one model; the model is attached to
    the returned evidence. An all-in or all-out Bernoulli draw is kept here and
    only fails later, at estimation time.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    candidates = sample_members(spec, n, rng_for(seed, "candidates"))
    bits = mode.assign(n, rng_for(seed, "assign"))
    included = candidates.subset(np.flatnonzero(bits == 1))
    train_set = included if base is None else base.concat(included)
    theta = _train_or_zero(train_set, trainer, rng_for(seed, "train"))
    return EvidenceSet(
        features=candidates.features,
        labels=candidates.labels,
        a=bits,
        y=_scored(attack, theta, candidates),
        regime=ONE_RUN,
        seed=None if seed is None else int(seed),
        orientation=attack.orientation,
        n_trainings=1,
        model=theta,
    )


def run_zerorun(
    model: ModelParams,
    members: Dataset,
    nonmembers: Dataset,
    attack: AttackSpec,
) -> EvidenceSet:
    """Score known members and non-members against a fixed model; no training."""
    if members.dim != model.dim or nonmembers.dim != model.dim:
        raise ValueError("dataset dim does not match the model")
    pooled = members.concat(nonmembers)
    bits = np.concatenate(
        [np.ones(len(members), dtype=np.int8), np.zeros(len(nonmembers), dtype=np.int8)]
    )
    return EvidenceSet(
        features=pooled.features,
        labels=pooled.labels,
        a=bits,
        y=_scored(attack, model, pooled),
        regime=ZERO_RUN,
        orientation=attack.orientation,
        n_trainings=0,
        model=model,
    )
