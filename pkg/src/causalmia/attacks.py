"""Loss-based membership scores."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .synthgen import Dataset, LabeledPoint
from .trainers import ModelParams, loss, losses

__all__ = ["AttackSpec", "RAW_LOSS", "MEMBER_HIGH", "score", "scores", "flip"]

RAW_LOSS = "RawLoss"
MEMBER_HIGH = "HigherScoreMeansMember"


@dataclass(frozen=True)
class AttackSpec:
    """Loss attack with a score orientation.

    ``RawLoss`` reports the loss itself (members score lower);
    ``HigherScoreMeansMember`` reports its negation.
    """

    kind: str = "LossBased"
    orientation: str = RAW_LOSS

    def __post_init__(self):
        if self.kind != "LossBased":
            raise ValueError(f"unsupported attack kind {self.kind!r}")
        if self.orientation not in (RAW_LOSS, MEMBER_HIGH):
            raise ValueError(f"unknown orientation {self.orientation!r}")

    def oriented(self, orientation: str) -> "AttackSpec":
        return AttackSpec(self.kind, orientation)


def _sign(orientation: str) -> float:
    return 1.0 if orientation == RAW_LOSS else -1.0


def score(attack: AttackSpec, model: ModelParams, point: LabeledPoint) -> float:
    return _sign(attack.orientation) * loss(model, point)


def scores(attack: AttackSpec, model: ModelParams, data: Dataset) -> np.ndarray:
    return _sign(attack.orientation) * losses(model, data)


def flip(values, src: str, dst: str) -> np.ndarray:
    """Re-express scores given in orientation ``src`` in orientation ``dst``."""
    values = np.asarray(values, dtype=float)
    return values if src == dst else -values
