"""Synthetic member / non-member data-generating processes.

Members are drawn from the target law ``a ~ N(0, I_d)``, ``b | a ~ N(a'w, s^2)``.
Shifted non-members use the same label law with ``a ~ N(mu, I_d)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .propensity import PropensityModel

__all__ = [
    "ProblemSpec",
    "LabeledPoint",
    "Dataset",
    "make_problem",
    "sample_members",
    "sample_shifted",
    "oracle_propensity",
    "log_density_ratio",
    "rng_for",
]


def rng_for(seed, *stream) -> np.random.Generator:
    """Independent generator for ``(seed, *stream)``.

    Used to give every protocol run its own reproducible stream, e.g.
    ``rng_for(master, "run", i)``.
    """
    words = [int(seed)]
    for s in stream:
        if isinstance(s, str):
            words.extend(s.encode())
        else:
            words.append(int(s))
    return np.random.default_rng(np.random.SeedSequence(words))


@dataclass(frozen=True)
class ProblemSpec:
    """Parameters of the synthetic linear-Gaussian problem."""

    dim: int
    teacher: np.ndarray
    shift: np.ndarray
    label_noise_sd: float = 1.0
    teacher_shift_corr: float = 0.0
    seed: Optional[int] = None

    def __post_init__(self):
        teacher = np.asarray(self.teacher, dtype=float)
        shift = np.asarray(self.shift, dtype=float)
        object.__setattr__(self, "teacher", teacher)
        object.__setattr__(self, "shift", shift)
        if teacher.shape != (self.dim,) or shift.shape != (self.dim,):
            raise ValueError("teacher and shift must both have length dim")
        if not np.linalg.norm(teacher) > 0:
            raise ValueError("teacher must be non-zero")
        if self.label_noise_sd < 0:
            raise ValueError("label_noise_sd must be non-negative")
        mu_norm = np.linalg.norm(shift)
        if mu_norm > 0:
            got = teacher @ shift / mu_norm
            want = self.teacher_shift_corr * np.linalg.norm(teacher)
            if abs(got - want) > 1e-9 * max(1.0, abs(want)):
                raise ValueError(
                    f"teacher.shift/|shift| = {got!r}, expected {want!r}"
                )

    @property
    def shift_norm(self) -> float:
        return float(np.linalg.norm(self.shift))

    def with_shift(self, shift) -> "ProblemSpec":
        shift = np.asarray(shift, dtype=float)
        corr = self.teacher_shift_corr
        if np.linalg.norm(shift) > 0:
            corr = float(
                self.teacher @ shift
                / (np.linalg.norm(shift) * np.linalg.norm(self.teacher))
            )
        return ProblemSpec(
            self.dim, self.teacher, shift, self.label_noise_sd, corr, self.seed
        )

    def with_noise(self, label_noise_sd: float) -> "ProblemSpec":
        return ProblemSpec(
            self.dim,
            self.teacher,
            self.shift,
            label_noise_sd,
            self.teacher_shift_corr,
            self.seed,
        )

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "teacher": self.teacher.tolist(),
            "shift": self.shift.tolist(),
            "label_noise_sd": self.label_noise_sd,
            "teacher_shift_corr": self.teacher_shift_corr,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "ProblemSpec":
        return cls(
            dim=int(doc["dim"]),
            teacher=np.asarray(doc["teacher"], dtype=float),
            shift=np.asarray(doc["shift"], dtype=float),
            label_noise_sd=float(doc.get("label_noise_sd", 1.0)),
            teacher_shift_corr=float(doc.get("teacher_shift_corr", 0.0)),
            seed=doc.get("seed"),
        )

    @classmethod
    def from_json(cls, text: str) -> "ProblemSpec":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class LabeledPoint:
    features: np.ndarray
    label: float


@dataclass(frozen=True)
class Dataset:
    """Ordered collection of labeled points stored as arrays.

    ``features`` has shape ``(n, dim)`` and ``labels`` shape ``(n,)``.
    """

    features: np.ndarray
    labels: np.ndarray
    dim: int = field(default=-1)

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.features, dtype=float))
        y = np.asarray(self.labels, dtype=float).reshape(-1)
        if x.shape[0] != y.shape[0]:
            raise ValueError("features and labels disagree on the number of points")
        dim = x.shape[1] if self.dim < 0 else self.dim
        if x.shape[1] != dim:
            raise ValueError(f"feature length {x.shape[1]} != dim {dim}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains non-finite entries")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "dim", dim)

    def __len__(self) -> int:
        return self.labels.shape[0]

    def __getitem__(self, i) -> LabeledPoint:
        return LabeledPoint(self.features[i], float(self.labels[i]))

    def __iter__(self) -> Iterator[LabeledPoint]:
        for i in range(len(self)):
            yield self[i]

    @property
    def points(self) -> list[LabeledPoint]:
        return list(self)

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(self.features[idx], self.labels[idx], self.dim)

    def concat(self, other: "Dataset") -> "Dataset":
        if other.dim != self.dim:
            raise ValueError("cannot concatenate datasets of different dim")
        return Dataset(
            np.vstack([self.features, other.features]),
            np.concatenate([self.labels, other.labels]),
            self.dim,
        )

    @classmethod
    def empty(cls, dim: int) -> "Dataset":
        return cls(np.empty((0, dim)), np.empty(0), dim)

    @classmethod
    def from_points(cls, points, dim: Optional[int] = None) -> "Dataset":
        points = list(points)
        if not points:
            if dim is None:
                raise ValueError("dim is required for an empty point list")
            return cls.empty(dim)
        x = np.stack([np.asarray(p.features, dtype=float) for p in points])
        y = np.array([p.label for p in points], dtype=float)
        return cls(x, y, x.shape[1] if dim is None else dim)


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def make_problem(
    seed,
    dim: int,
    corr: float,
    *,
    teacher_norm: float = 1.0,
    shift_norm: float = 1.0,
    label_noise_sd: float = 1.0,
) -> ProblemSpec:
    """Draw a random shift direction and a teacher with a fixed correlation.

    The shift is ``shift_norm`` times a uniform unit vector ``u``; the teacher is
    ``teacher_norm * (corr * u + sqrt(1 - corr^2) * v)`` with ``v`` a random
    unit vector orthogonal to ``u``, so that ``teacher . u = corr * |teacher|``.
    """
    if not -1.0 <= corr <= 1.0:
        raise ValueError("corr must lie in [-1, 1]")
    if dim < 1 or (dim < 2 and abs(corr) < 1):
        raise ValueError("dim >= 2 is required when |corr| < 1")
    rng = rng_for(seed, "problem")
    u = _unit(rng.standard_normal(dim))
    v = rng.standard_normal(dim) if dim > 1 else np.zeros(dim)
    shift = shift_norm * u
    if abs(corr) < 1:
        v = _unit(v - (v @ u) * u)
        direction = corr * u + np.sqrt(1.0 - corr * corr) * v
        direction = _unit(direction)
    else:
        # from the shift itself, so teacher == shift / |shift| holds exactly
        direction = np.sign(corr) * (shift / np.linalg.norm(shift) if shift_norm > 0 else u)
    return ProblemSpec(
        dim=dim,
        teacher=teacher_norm * direction,
        shift=shift,
        label_noise_sd=label_noise_sd,
        teacher_shift_corr=corr,
        seed=None if seed is None else int(seed),
    )


def _sample(spec: ProblemSpec, n: int, rng, mean) -> Dataset:
    if n < 1:
        raise ValueError("n must be >= 1")
    a = rng.standard_normal((n, spec.dim))
    if mean is not None:
        a += mean
    noise = rng.standard_normal(n)
    b = a @ spec.teacher + spec.label_noise_sd * noise
    return Dataset(a, b, spec.dim)


def sample_members(spec: ProblemSpec, n: int, seed) -> Dataset:
    """``n`` i.i.d. draws from the target (member) distribution."""
    return _sample(spec, n, _as_rng(seed), None)


def sample_shifted(spec: ProblemSpec, n: int, seed) -> Dataset:
    """``n`` i.i.d. draws with features shifted by ``spec.shift``.

    With a zero shift this reproduces :func:`sample_members` draw for draw.
    """
    return _sample(spec, n, _as_rng(seed), spec.shift)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return rng_for(seed, "sample")


def log_density_ratio(spec: ProblemSpec, features) -> np.ndarray:
    """``log p_T(a) - log p_0(a) = -a'mu + |mu|^2 / 2``."""
    a = np.atleast_2d(np.asarray(features, dtype=float))
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite feature vector")
    mu = spec.shift
    return -(a @ mu) + 0.5 * (mu @ mu)


def oracle_propensity(
    spec: ProblemSpec, n_member: int, n_nonmember: int
) -> PropensityModel:
    """True membership probability for pooled member / shifted samples.

    ``pi(a) = r(a) / (r(a) + n0/n1)`` with ``r`` the Gaussian density ratio.
    Its log-odds ``-a'mu + |mu|^2/2 + log(n1/n0)`` are affine in ``a``, so the
    oracle is returned as a logistic model with exact weights.
    """
    if n_member < 1 or n_nonmember < 1:
        raise ValueError("group sizes must be positive")
    mu = spec.shift
    intercept = 0.5 * (mu @ mu) + np.log(n_member / n_nonmember)
    return PropensityModel(
        kind="oracle",
        weights=np.concatenate([[intercept], -mu]),
        provenance=f"oracle gaussian shift, n1={n_member}, n0={n_nonmember}",
    )
