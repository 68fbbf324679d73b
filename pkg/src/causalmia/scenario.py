"""Config-driven runs of the synthetic ridge and DP-SGD experiments.

A run executes every requested regime for each repetition, evaluates every
applicable estimator, and writes a bundle:

``metrics.csv``
    one row per (regime, estimator) with mean and sd over repetitions
``metrics_runs.csv`` / ``metrics.json``
    every repetition's row, pointing at its evidence file
``roc_<regime>_<estimator>.csv``
    the ROC of the first successful repetition
``dp_bound.csv``
    the DP ceiling, when the trainer carries (eps, delta) labels
``evidence/<regime>_rep<r>.csv``
    the scored records behind every cell
``manifest.json``
    effective config, seeds, versions, wall time, file hashes, failures
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
import platform
import time
import traceback
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .attacks import AttackSpec, RAW_LOSS
from .estimators import (
    AIPW,
    CLASSICAL,
    ESTIMATOR_KINDS,
    GFORMULA,
    IPW,
    RocCurve,
    bound_excess,
    dp_roc_bound,
    evaluate,
    fit_outcome_model,
    ipw_ate,
    oracle_outcome_model,
    threshold_grid,
)
from .propensity import LogisticFitConfig, constant_propensity, cross_fit, fit_logistic, make_fold_plan
from .protocols import AssignmentMode, EvidenceSet, run_multirun, run_onerun, run_zerorun
from .synthgen import Dataset, make_problem, oracle_propensity, rng_for, sample_members, sample_shifted
from .trainers import DPSGD, RIDGE, TrainerConfig, ridge_loo_predictions, train

logger = logging.getLogger(__name__)

__all__ = [
    "RIDGE_SCENARIO",
    "DPSGD_SCENARIO",
    "CUSTOM_SCENARIO",
    "REGIMES",
    "APPLICABLE",
    "RunConfig",
    "ReportBundle",
    "run_scenario",
    "simulate",
    "aggregate_bundles",
    "render_roc",
    "problem_for",
]

RIDGE_SCENARIO = "RidgeSynthetic"
DPSGD_SCENARIO = "DpSgdSynthetic"
CUSTOM_SCENARIO = "Custom"
SCENARIOS = (RIDGE_SCENARIO, DPSGD_SCENARIO, CUSTOM_SCENARIO)

MULTI = "MultiRun"
ONE = "OneRun"
ZERO_RAW = "ZeroRunRaw"
ZERO_ORACLE = "ZeroRunOracle"
ZERO_LEARNED = "ZeroRunLearned"
REGIMES = (MULTI, ONE, ZERO_RAW, ZERO_ORACLE, ZERO_LEARNED)

# Which estimators make sense on which evidence. Randomised regimes need no
# correction; the corrected zero-run regimes differ only in the nuisance models.
APPLICABLE = {
    MULTI: (CLASSICAL,),
    ONE: (CLASSICAL,),
    ZERO_RAW: (CLASSICAL,),
    ZERO_ORACLE: (IPW, GFORMULA, AIPW),
    ZERO_LEARNED: (IPW, GFORMULA, AIPW),
}

_ROW_LABELS = ("regime", "estimator_kind", "rep", "seed", "evidence", "bundle")


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a bundle.

    ``teacher_norm=None`` means ``sqrt(dim)``. ``propensity`` picks the
    nuisance model of the ``ZeroRunLearned`` regime: ``logistic``, ``oracle``
    or ``constant:<p>``. ``crossfit_k < 2`` fits the logistic model once on
    all records (in-sample) instead of cross-fitting. ``n_jobs=None`` uses
    every available core.
    """

    scenario: str = RIDGE_SCENARIO
    regimes: tuple = REGIMES
    estimators: tuple = ESTIMATOR_KINDS
    repetitions: int = 1
    master_seed: int = 0
    output_dir: str = "results"
    n_jobs: Optional[int] = None
    dim: int = 2500
    corr: float = 0.9
    teacher_norm: Optional[float] = None
    shift_norm: float = 1.0
    label_noise_sd: float = 1.0
    trainer: TrainerConfig = field(default_factory=lambda: TrainerConfig(RIDGE, ridge_lambda=1e4))
    base_train_size: int = 2000
    n_eval: int = 400
    onerun_n: int = 4000
    zero_members: int = 2000
    zero_nonmembers: int = 2000
    propensity: str = "logistic"
    crossfit_k: int = 2
    propensity_l2: float = 1.0
    propensity_max_iter: int = 100
    eta: float = 0.01
    alphas: tuple = (0.2,)
    hoeffding_t: Optional[float] = None
    svg: bool = False

    def __post_init__(self):
        object.__setattr__(self, "regimes", tuple(self.regimes))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if isinstance(self.trainer, dict):
            object.__setattr__(self, "trainer", TrainerConfig.from_dict(self.trainer))
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if not self.regimes:
            raise ValueError("at least one regime is required")
        if not self.estimators:
            raise ValueError("at least one estimator is required")
        for r in self.regimes:
            if r not in REGIMES:
                raise ValueError(f"unknown regime {r!r}")
        for e in self.estimators:
            if e not in ESTIMATOR_KINDS:
                raise ValueError(f"unknown estimator {e!r}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        _parse_propensity(self.propensity)

    @classmethod
    def for_scenario(cls, scenario: str, **overrides) -> "RunConfig":
        """Defaults of a named scenario, then ``overrides``."""
        base: dict = {"scenario": scenario}
        if scenario == DPSGD_SCENARIO:
            base.update(
                dim=400,
                trainer=TrainerConfig(DPSGD, dp_epsilon=0.602, dp_delta=0.01),
            )
        base.update(overrides)
        return cls(**base)

    @property
    def effective_teacher_norm(self) -> float:
        return float(np.sqrt(self.dim)) if self.teacher_norm is None else float(self.teacher_norm)

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["trainer"] = self.trainer.to_dict()
        doc["regimes"] = list(self.regimes)
        doc["estimators"] = list(self.estimators)
        doc["alphas"] = list(self.alphas)
        return doc

    @property
    def config_hash(self) -> str:
        doc = self.to_dict()
        # where results land and how many cores compute them do not change them
        doc.pop("output_dir")
        doc.pop("n_jobs")
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        doc = dict(doc)
        scenario = doc.pop("scenario", RIDGE_SCENARIO)
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "trainer" in doc:
            start = cls.for_scenario(scenario).trainer.to_dict()
            start.update(doc["trainer"])
            doc["trainer"] = TrainerConfig.from_dict(start)
        return cls.for_scenario(scenario, **doc)

    @classmethod
    def from_toml(cls, path, overrides: Optional[dict] = None) -> "RunConfig":
        import tomli

        with open(path, "rb") as fh:
            doc = tomli.load(fh)
        _merge(doc, overrides or {})
        return cls.from_dict(doc)


def _parse_propensity(text: str):
    """``("logistic", None)``, ``("oracle", None)`` or ``("constant", p)``."""
    if text in ("logistic", "oracle"):
        return text, None
    if text.startswith("constant:"):
        p = float(text.split(":", 1)[1])
        if not 0.0 < p < 1.0:
            raise ValueError("constant propensity must lie in (0, 1)")
        return "constant", p
    raise ValueError(f"propensity must be logistic, oracle or constant:<p>, got {text!r}")


def _merge(doc: dict, overrides: dict) -> None:
    """Apply ``key=value`` overrides; ``trainer.x`` reaches into the trainer table."""
    for key, value in overrides.items():
        if key.startswith("trainer."):
            doc.setdefault("trainer", {})[key.split(".", 1)[1]] = value
        else:
            doc[key] = value


@dataclass
class ReportBundle:
    """Paths and in-memory results of one scenario run."""

    output_dir: Path
    cells: list
    failures: list
    manifest: dict

    @property
    def ok(self) -> bool:
        return not self.failures

    def cell(self, regime: str, estimator: str) -> dict:
        for c in self.cells:
            if c["regime"] == regime and c["estimator"] == estimator:
                return c
        raise KeyError((regime, estimator))

    def values(self, regime: str, estimator: str, metric: str) -> np.ndarray:
        """Per-repetition values of one metric."""
        return np.array([run[metric] for run in self.cell(regime, estimator)["runs"]], dtype=float)


def _rep_seed(master_seed: int, rep: int) -> int:
    return int(np.random.SeedSequence([int(master_seed), int(rep)]).generate_state(1, np.uint64)[0] >> 1)


def _problem(cfg: RunConfig, seed: int):
    return make_problem(
        seed,
        cfg.dim,
        cfg.corr,
        teacher_norm=cfg.effective_teacher_norm,
        shift_norm=cfg.shift_norm,
        label_noise_sd=cfg.label_noise_sd,
    )


def problem_for(cfg: RunConfig, rep: int = 0):
    """The synthetic problem drawn for repetition ``rep``."""
    return _problem(cfg, _rep_seed(cfg.master_seed, rep))


def _evidence(cfg: RunConfig, seed: int, regimes) -> dict:
    """Evidence per requested regime; the three zero-run regimes share one model."""
    spec = _problem(cfg, seed)
    attack = AttackSpec(orientation=RAW_LOSS)
    out, errors = {}, {}
    jobs = cfg.n_jobs if cfg.n_jobs is not None else (os.cpu_count() or 1)

    def guarded(name, fn):
        try:
            out[name] = fn()
        except Exception as exc:  # recorded per cell, never fatal for the run
            logger.warning("regime %s failed: %s", name, exc)
            errors[name] = f"{type(exc).__name__}: {exc}"

    if MULTI in regimes:
        guarded(
            MULTI,
            lambda: run_multirun(
                spec, cfg.trainer, attack, cfg.base_train_size, cfg.n_eval, AssignmentMode(), seed, n_jobs=jobs
            ),
        )
    if ONE in regimes:
        guarded(ONE, lambda: run_onerun(spec, cfg.trainer, attack, cfg.onerun_n, AssignmentMode(), seed))
    zero = [r for r in (ZERO_RAW, ZERO_ORACLE, ZERO_LEARNED) if r in regimes]
    if zero:

        def zero_run():
            members = sample_members(spec, cfg.zero_members, rng_for(seed, "zero", "members"))
            nonmembers = sample_shifted(spec, cfg.zero_nonmembers, rng_for(seed, "zero", "nonmembers"))
            model = train(members, cfg.trainer, rng_for(seed, "zero", "train"))
            return run_zerorun(model, members, nonmembers, attack)

        guarded("zero", zero_run)
        for r in zero:
            if "zero" in out:
                out[r] = out["zero"]
            else:
                errors[r] = errors["zero"]
        out.pop("zero", None)
        errors.pop("zero", None)
    return {"spec": spec, "evidence": out, "errors": errors}


def _learned_nuisances(cfg: RunConfig, ev: EvidenceSet, spec, seed: int):
    kind, p_const = _parse_propensity(cfg.propensity)
    if kind == "logistic":
        fit_cfg = LogisticFitConfig(max_iter=cfg.propensity_max_iter, l2=cfg.propensity_l2)
        if cfg.crossfit_k >= 2:
            plan = make_fold_plan(len(ev), cfg.crossfit_k, seed=seed, labels=ev.a)
            pi_raw, models = cross_fit(ev.features, ev.a, plan, fit_cfg)
        else:
            m = fit_logistic(
                ev.features[ev.a == 1], ev.features[ev.a == 0], fit_cfg.max_iter, fit_cfg.tol, l2=fit_cfg.l2
            )
            models, pi_raw = [m], m(ev.features)
    else:
        model = oracle_propensity(spec, ev.n1, ev.n0) if kind == "oracle" else constant_propensity(p_const)
        models, pi_raw = [model], model(ev.features)
    pi = np.clip(pi_raw, cfg.eta, 1.0 - cfg.eta)

    def balancing(x):
        # averaged out-of-fold log-odds, with a square term for the quadratic loss
        s = np.mean([m.log_odds(x) for m in models], axis=0)
        return np.column_stack([s, s * s])

    non = ev.a == 0
    om = fit_outcome_model(
        ev.features[non], ev.y[non], threshold_grid(ev.y), orientation=ev.orientation, feature_map=balancing
    )
    return pi, om


def _loo(cfg: RunConfig, ev: EvidenceSet):
    """Leave-one-out predictions for the zero-run training records (ridge only).

    DP-SGD bounds each record's influence on the model, so there the fitted
    model stands in for every leave-one-out model.
    """
    if cfg.trainer.variant != RIDGE:
        return None
    members = Dataset(ev.features[ev.a == 1], ev.labels[ev.a == 1])
    return members.features, ridge_loo_predictions(members, cfg.trainer.ridge_lambda)


def _cells_for_rep(cfg: RunConfig, rep: int) -> dict:
    seed = _rep_seed(cfg.master_seed, rep)
    sim = _evidence(cfg, seed, cfg.regimes)
    spec = sim["spec"]
    eps, delta = cfg.trainer.dp_epsilon, cfg.trainer.dp_delta
    rows, curves, failures, evidence_csv = [], {}, [], {}
    for regime in cfg.regimes:
        wanted = [e for e in cfg.estimators if e in APPLICABLE[regime]]
        if not wanted:
            continue
        if regime in sim["errors"]:
            for est in wanted:
                failures.append({"regime": regime, "estimator": est, "rep": rep, "error": sim["errors"][regime]})
            continue
        ev = sim["evidence"][regime]
        evidence_csv[regime] = _evidence_text(ev)
        nuisances = {}
        try:
            if regime == ZERO_ORACLE:
                nuisances["pi"] = oracle_propensity(spec, ev.n1, ev.n0)
                nuisances["om"] = oracle_outcome_model(spec, ev.model, RAW_LOSS, loo=_loo(cfg, ev))
            elif regime == ZERO_LEARNED:
                nuisances["pi"], nuisances["om"] = _learned_nuisances(cfg, ev, spec, seed)
        except Exception as exc:
            for est in wanted:
                failures.append({"regime": regime, "estimator": est, "rep": rep, "error": f"{type(exc).__name__}: {exc}"})
            continue
        for est in wanted:
            try:
                report, curve = evaluate(
                    ev,
                    est,
                    pi=nuisances.get("pi"),
                    om=nuisances.get("om"),
                    alphas=cfg.alphas,
                )
                row = report.row()
                row["regime"] = regime  # scenario label, finer than the protocol tag
                if cfg.hoeffding_t is not None and est == CLASSICAL:
                    normed, _ = evaluate(ev.normalize(), est, alphas=cfg.alphas, hoeffding_t=cfg.hoeffding_t)
                    row["ate_normalized"] = normed.ate
                    row["hoeffding_halfwidth"] = normed.hoeffding_halfwidth
                if est == IPW:
                    row["ate_hajek"] = ipw_ate(ev.oriented(RAW_LOSS), nuisances["pi"], self_normalize=True)
                if eps is not None and delta is not None:
                    row["dp_excess"] = bound_excess(curve, eps, delta)
                row.update(rep=rep, seed=seed, evidence=f"evidence/{regime}_rep{rep}.csv")
                rows.append(row)
                curves[(regime, est)] = curve
            except Exception as exc:
                logger.debug("cell failed:\n%s", traceback.format_exc())
                failures.append({"regime": regime, "estimator": est, "rep": rep, "error": f"{type(exc).__name__}: {exc}"})
    return {"rows": rows, "curves": curves, "failures": failures, "evidence": evidence_csv, "seed": seed}


def _evidence_text(ev: EvidenceSet) -> str:
    lines = ["index,a,y,feature_hash"]
    for i, (a, y, h) in enumerate(zip(ev.a, ev.y, ev.feature_hashes())):
        lines.append(f"{i},{int(a)},{float(y)!r},{h}")
    return "\n".join(lines) + "\n"


def _aggregate(rows: list, regimes, estimators) -> list:
    cells = []
    for regime in regimes:
        for est in estimators:
            runs = [r for r in rows if r["regime"] == regime and r["estimator_kind"] == est]
            if not runs and est not in APPLICABLE[regime]:
                continue
            metrics = [k for k in (runs[0] if runs else {}) if k not in _ROW_LABELS]
            mean, sd = {}, {}
            for k in metrics:
                vals = np.array([np.nan if r.get(k) is None else r[k] for r in runs], dtype=float)
                if np.all(np.isnan(vals)):
                    continue
                mean[k] = float(np.nanmean(vals))
                sd[k] = float(np.nanstd(vals, ddof=1)) if np.sum(~np.isnan(vals)) >= 2 else 0.0
            cells.append({"regime": regime, "estimator": est, "n_ok": len(runs), "mean": mean, "sd": sd, "runs": runs})
    return cells


class _Writer:
    """Single funnel for bundle files so the manifest sees every one of them."""

    def __init__(self, root: Path):
        self.root = root
        self.files: dict = {}
        root.mkdir(parents=True, exist_ok=True)

    def text(self, rel: str, content: str) -> Path:
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content)
        self.files[rel] = hashlib.sha256(content.encode()).hexdigest()
        return path

    def rehash(self, rel: str) -> None:
        self.files[rel] = hashlib.sha256((self.root / rel).read_bytes()).hexdigest()


def _csv_text(header, rows) -> str:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
    return buf.getvalue()


def _roc_text(curve: RocCurve) -> str:
    return _csv_text(["fpr", "tpr", "threshold"], zip(curve.fpr.tolist(), curve.tpr.tolist(), curve.thresholds.tolist()))


def _write_tables(writer: _Writer, cells: list, failures: list) -> None:
    metric_names: list = []
    for c in cells:
        for k in c["mean"]:
            if k not in metric_names:
                metric_names.append(k)
    header = ["regime", "estimator", "n_ok", "n_failed"]
    for k in metric_names:
        header += [f"{k}_mean", f"{k}_sd"]
    body = []
    for c in cells:
        n_failed = sum(1 for f in failures if f["regime"] == c["regime"] and f["estimator"] == c["estimator"])
        line = [c["regime"], c["estimator"], c["n_ok"], n_failed]
        for k in metric_names:
            line += [c["mean"].get(k), c["sd"].get(k)]
        body.append(line)
    writer.text("metrics.csv", _csv_text(header, body))

    runs = [r for c in cells for r in c["runs"]]
    run_keys: list = []
    for r in runs:
        for k in r:
            if k not in run_keys:
                run_keys.append(k)
    writer.text("metrics_runs.csv", _csv_text(run_keys, [[r.get(k) for k in run_keys] for r in runs]))
    writer.text("metrics.json", json.dumps({"cells": cells, "failures": failures}, indent=2, sort_keys=True))


def _versions() -> dict:
    import scipy

    from . import __version__

    out = {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__, "causalmia": __version__}
    try:
        import numba

        out["numba"] = numba.__version__
    except ImportError:  # pragma: no cover
        pass
    return out


def _manifest(writer: _Writer, cfg: RunConfig, seeds: list, wall: float, failures: list, kind: str) -> dict:
    doc = {
        "kind": kind,
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash,
        "repetition_seeds": seeds,
        "versions": _versions(),
        "n_jobs": cfg.n_jobs if cfg.n_jobs is not None else (os.cpu_count() or 1),
        "wall_time_s": round(wall, 3),
        "status": "ok" if not failures else "partial",
        "failures": failures,
        "files": dict(sorted(writer.files.items())),
    }
    (writer.root / "manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True))
    return doc


def run_scenario(cfg: RunConfig) -> ReportBundle:
    """Run every repetition, evaluate, and write the bundle to ``cfg.output_dir``."""
    t0 = time.perf_counter()
    writer = _Writer(Path(cfg.output_dir))
    rows, failures, seeds, first_curves = [], [], [], {}
    for rep in range(cfg.repetitions):
        res = _cells_for_rep(cfg, rep)
        seeds.append(res["seed"])
        rows += res["rows"]
        failures += res["failures"]
        for regime, text in res["evidence"].items():
            writer.text(f"evidence/{regime}_rep{rep}.csv", text)
        for key, curve in res["curves"].items():
            first_curves.setdefault(key, curve)
        logger.info("repetition %d/%d done", rep + 1, cfg.repetitions)

    for (regime, est), curve in first_curves.items():
        writer.text(f"roc_{regime}_{est}.csv", _roc_text(curve))
    eps, delta = cfg.trainer.dp_epsilon, cfg.trainer.dp_delta
    if eps is not None and delta is not None:
        x, y = dp_roc_bound(eps, delta)
        writer.text("dp_bound.csv", _csv_text(["fpr", "tpr"], zip(x.tolist(), y.tolist())))

    cells = _aggregate(rows, cfg.regimes, cfg.estimators)
    _write_tables(writer, cells, failures)
    if cfg.svg:
        render_roc(writer.root, with_dp_bound=eps is not None)
        writer.rehash("roc.svg")
    manifest = _manifest(writer, cfg, seeds, time.perf_counter() - t0, failures, "evaluate")
    return ReportBundle(writer.root, cells, failures, manifest)


def simulate(cfg: RunConfig) -> ReportBundle:
    """Generate and score the evidence of every regime, without estimation."""
    t0 = time.perf_counter()
    writer = _Writer(Path(cfg.output_dir))
    failures, seeds = [], []
    for rep in range(cfg.repetitions):
        seed = _rep_seed(cfg.master_seed, rep)
        seeds.append(seed)
        sim = _evidence(cfg, seed, cfg.regimes)
        for regime, ev in sim["evidence"].items():
            writer.text(f"evidence/{regime}_rep{rep}.csv", _evidence_text(ev))
        for regime, err in sim["errors"].items():
            failures.append({"regime": regime, "estimator": None, "rep": rep, "error": err})
    manifest = _manifest(writer, cfg, seeds, time.perf_counter() - t0, failures, "simulate")
    return ReportBundle(writer.root, [], failures, manifest)


def aggregate_bundles(bundle_dirs, output_dir) -> ReportBundle:
    """Pool the per-repetition rows of one or more bundles and re-aggregate."""
    rows, failures, regimes, estimators = [], [], [], []
    for d in bundle_dirs:
        doc = json.loads((Path(d) / "metrics.json").read_text())
        for c in doc["cells"]:
            if c["regime"] not in regimes:
                regimes.append(c["regime"])
            if c["estimator"] not in estimators:
                estimators.append(c["estimator"])
            for r in c["runs"]:
                rows.append(dict(r, bundle=str(d)))
        failures += doc["failures"]
    writer = _Writer(Path(output_dir))
    cells = _aggregate(rows, regimes, estimators)
    _write_tables(writer, cells, failures)
    return ReportBundle(writer.root, cells, failures, {"sources": [str(d) for d in bundle_dirs]})


def render_roc(bundle_path, with_dp_bound: bool = True, regimes=None, out_name: str = "roc.svg") -> tuple[Path, list]:
    """Overlay the bundle's ROC curves, the diagonal and optionally the DP bound.

    Returns the SVG path and the list of requested curves that were missing.
    Output is byte-identical for identical bundles.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    root = Path(bundle_path)
    available = sorted(root.glob("roc_*.csv"))
    missing = []
    if regimes is not None:
        wanted = [root / f"roc_{name}.csv" for name in regimes]
        missing = [p.name for p in wanted if not p.exists()]
        available = [p for p in wanted if p.exists()]

    with matplotlib.rc_context({"svg.hashsalt": "causalmia", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 5))
        ax.plot([0, 1], [0, 1], color="0.6", lw=1, ls=":", label="chance")
        for path in available:
            curve = RocCurve.from_csv(path)
            label = path.stem[len("roc_"):].replace("_", " / ")
            ax.plot(curve.fpr, curve.tpr, lw=1.2, label=f"{label} (AUC {curve.auc:.3f})")
        bound = root / "dp_bound.csv"
        if with_dp_bound and bound.exists():
            data = np.genfromtxt(bound, delimiter=",", names=True)
            ax.plot(data["fpr"], data["tpr"], color="k", lw=1.5, ls="--", label="DP bound")
        ax.set_xlabel("FPR")
        ax.set_ylabel("TPR")
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1)
        ax.legend(loc="lower right", fontsize=7)
        out = root / out_name
        fig.savefig(out, format="svg", metadata={"Date": None})
        plt.close(fig)
    return out, missing

