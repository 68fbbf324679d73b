"""One row of the evaluation table, and the dispatcher that fills it."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ..attacks import MEMBER_HIGH, RAW_LOSS
from ..protocols import EvidenceSet
from .classical import ate_dim, classical_roc, hoeffding_halfwidth, tpr_at_fpr
from .outcome import OutcomeModel, aipw_ate, g_formula_ate, g_formula_fpr_curve
from .roc import RocCurve, youden_sup
from .weighting import ipw_ate, ipw_roc, ipw_tpr_at_fpr

__all__ = ["CLASSICAL", "IPW", "GFORMULA", "AIPW", "ESTIMATOR_KINDS", "MetricsReport", "evaluate"]

CLASSICAL = "Classical"
IPW = "IPW"
GFORMULA = "GFormula"
AIPW = "AIPW"
ESTIMATOR_KINDS = (CLASSICAL, IPW, GFORMULA, AIPW)


@dataclass
class MetricsReport:
    """AUC, ATE, TPR at fixed FPR levels, Youden sup and an optional CI half-width."""

    auc: float
    ate: float
    tpr_at_fpr: dict = field(default_factory=dict)
    youden_sup: float = float("nan")
    hoeffding_halfwidth: Optional[float] = None
    estimator_kind: str = CLASSICAL
    regime: str = ""

    def __post_init__(self):
        if self.estimator_kind not in ESTIMATOR_KINDS:
            raise ValueError(f"unknown estimator kind {self.estimator_kind!r}")
        if not 0.0 <= self.auc <= 1.0:
            raise ValueError(f"auc {self.auc} outside [0, 1]")
        for alpha, v in self.tpr_at_fpr.items():
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"TPR@{alpha} = {v} outside [0, 1]")

    def columns(self) -> list[str]:
        cols = ["regime", "estimator_kind", "auc", "youden_sup", "ate"]
        cols += [f"tpr@{a:g}" for a in sorted(self.tpr_at_fpr)]
        return cols + ["hoeffding_halfwidth"]

    def row(self) -> dict:
        out = {
            "regime": self.regime,
            "estimator_kind": self.estimator_kind,
            "auc": self.auc,
            "youden_sup": self.youden_sup,
            "ate": self.ate,
        }
        for a in sorted(self.tpr_at_fpr):
            out[f"tpr@{a:g}"] = self.tpr_at_fpr[a]
        out["hoeffding_halfwidth"] = self.hoeffding_halfwidth
        return out

    def to_csv_row(self, header: bool = False) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=self.columns(), lineterminator="\n")
        if header:
            writer.writeheader()
        writer.writerow({k: "" if v is None else v for k, v in self.row().items()})
        return buf.getvalue()

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["tpr_at_fpr"] = {f"{a:g}": v for a, v in self.tpr_at_fpr.items()}
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "MetricsReport":
        doc = dict(doc)
        doc["tpr_at_fpr"] = {float(a): float(v) for a, v in doc.get("tpr_at_fpr", {}).items()}
        return cls(**doc)

    @classmethod
    def from_json(cls, text: str) -> "MetricsReport":
        return cls.from_dict(json.loads(text))


def _tpr_on_curve(curve: RocCurve, alpha: float) -> float:
    """TPR of the curve's upper envelope at FPR ``alpha``, linearly interpolated."""
    return float(np.clip(curve.tpr_at([alpha])[0], 0.0, 1.0))


def evaluate(
    ev: EvidenceSet,
    kind: str = CLASSICAL,
    pi=None,
    om: Optional[OutcomeModel] = None,
    alphas=(0.2,),
    hoeffding_t: Optional[float] = None,
    grid=None,
) -> tuple[MetricsReport, RocCurve]:
    """Fill a :class:`MetricsReport` and return it with the ROC used.

    The ATE is computed on raw losses and the ROC quantities with member-high
    scores, whatever the orientation of ``ev``. ``pi`` is required for IPW and
    AIPW, ``om`` for GFormula and AIPW.
    """
    if kind not in ESTIMATOR_KINDS:
        raise ValueError(f"unknown estimator kind {kind!r}")
    if kind in (IPW, AIPW) and pi is None:
        raise ValueError(f"{kind} needs a propensity model")
    if kind in (GFORMULA, AIPW) and om is None:
        raise ValueError(f"{kind} needs an outcome model")
    ev.require_groups()
    raw = ev.oriented(RAW_LOSS)
    high = ev.oriented(MEMBER_HIGH)

    if kind == CLASSICAL:
        ate = ate_dim(raw)
        curve = classical_roc(high)
        tprs = {float(a): tpr_at_fpr(high, a) for a in alphas}
    elif kind == IPW:
        ate = ipw_ate(raw, pi)
        curve = ipw_roc(high, pi)
        tprs = {float(a): ipw_tpr_at_fpr(high, pi, a) for a in alphas}
    else:
        use_pi = pi if kind == AIPW else None
        ate = g_formula_ate(raw, om) if kind == GFORMULA else aipw_ate(raw, pi, om)
        curve = g_formula_fpr_curve(high, om, use_pi, grid)
        tprs = {float(a): _tpr_on_curve(curve, a) for a in alphas}

    half = None
    if hoeffding_t is not None and ev.normalized:
        half = hoeffding_halfwidth(ev.n1, ev.n0, hoeffding_t, scores_normalized=True)
    auc = min(max(curve.auc, 0.0), 1.0)
    report = MetricsReport(
        auc=auc,
        ate=ate,
        tpr_at_fpr=tprs,
        youden_sup=youden_sup(curve),
        hoeffding_halfwidth=half,
        estimator_kind=kind,
        regime=ev.regime,
    )
    if not math.isfinite(report.ate):
        raise ValueError("non-finite ATE")
    return report, curve
