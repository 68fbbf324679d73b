"""Shared helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from causalmia.protocols import EvidenceSet


def make_evidence(y1, y0, x1=None, x0=None, regime="Test", **kw) -> EvidenceSet:
    """Evidence from member scores ``y1`` and non-member scores ``y0``."""
    y1 = np.asarray(y1, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    n1, n0 = len(y1), len(y0)
    if x1 is None:
        x1 = np.zeros((n1, 1))
    if x0 is None:
        x0 = np.zeros((n0, 1))
    x1 = np.asarray(x1, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    d = x1.size // n1 if n1 else x0.size // n0
    x1, x0 = x1.reshape(n1, d), x0.reshape(n0, d)
    x = np.vstack([x1, x0])
    return EvidenceSet(
        features=x,
        labels=np.zeros(n1 + n0),
        a=np.r_[np.ones(n1), np.zeros(n0)],
        y=np.r_[y1, y0],
        regime=regime,
        **kw,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list = []


def record_criterion(number: int, passed, detail: str) -> None:
    """Log one acceptance line; ``passed=None`` marks an excluded criterion."""
    status = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
    ACCEPTANCE_LINES.append((number, f"criterion {number:2d}: {status}  {detail}"))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
