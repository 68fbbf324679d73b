"""Command-line entry point: ``causalmia {simulate,evaluate,roc,stability,report}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import tomli

from .scenario import (
    DPSGD_SCENARIO,
    RIDGE_SCENARIO,
    SCENARIOS,
    RunConfig,
    aggregate_bundles,
    problem_for,
    render_roc,
    run_scenario,
    simulate,
)
from .stability import estimate_stability, theorem_deviation

logger = logging.getLogger("causalmia")


def _parse_value(text: str):
    """TOML literal when possible (numbers, booleans, lists), else a bare string."""
    try:
        return tomli.loads(f"v = {text}")["v"]
    except tomli.TOMLDecodeError:
        return text


def _overrides(args) -> dict:
    out = {}
    for item in args.set or []:
        if "=" not in item:
            raise SystemExit(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = _parse_value(value.strip())
    for flag, key in (("repetitions", "repetitions"), ("seed", "master_seed"), ("out", "output_dir"), ("n_jobs", "n_jobs")):
        value = getattr(args, flag, None)
        if value is not None:
            out[key] = value
    if getattr(args, "svg", False):
        out["svg"] = True
    if getattr(args, "propensity", None):
        out["propensity"] = args.propensity
    return out


def _config(args) -> RunConfig:
    overrides = _overrides(args)
    if args.config:
        if args.scenario:
            overrides["scenario"] = args.scenario
        return RunConfig.from_toml(args.config, overrides)
    doc = {"scenario": args.scenario or RIDGE_SCENARIO}
    trainer = {k.split(".", 1)[1]: v for k, v in overrides.items() if k.startswith("trainer.")}
    doc.update({k: v for k, v in overrides.items() if not k.startswith("trainer.")})
    if trainer:
        doc["trainer"] = trainer
    return RunConfig.from_dict(doc)


def _add_config_args(p: argparse.ArgumentParser, *, with_out: bool = True) -> None:
    p.add_argument("--config", type=Path, help="TOML run configuration")
    p.add_argument("--scenario", choices=SCENARIOS, help=f"named defaults (e.g. {RIDGE_SCENARIO}, {DPSGD_SCENARIO})")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key (repeatable); trainer.KEY for trainer fields")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--n-jobs", dest="n_jobs", type=int, help="worker processes (default: all cores)")
    if with_out:
        p.add_argument("--propensity", metavar="{oracle|logistic|constant:<p>}", help="nuisance propensity of the ZeroRunLearned regime")
        p.add_argument("--repetitions", type=int)
        p.add_argument("--out", type=str, help="output directory")


def _print_cells(bundle) -> None:
    for c in bundle.cells:
        m, s = c["mean"], c["sd"]
        parts = [f"{k}={m[k]:.4g}±{s.get(k, 0.0):.3g}" for k in ("auc", "youden_sup", "ate") if k in m]
        tprs = [k for k in m if k.startswith("tpr@")]
        parts += [f"{k}={m[k]:.3f}" for k in tprs]
        print(f"{c['regime']:15s} {c['estimator']:9s} n={c['n_ok']:<3d} " + " ".join(parts))
    for f in bundle.failures:
        print(f"FAILED {f['regime']}/{f['estimator']} rep {f['rep']}: {f['error']}", file=sys.stderr)


def cmd_simulate(args) -> int:
    cfg = _config(args)
    bundle = simulate(cfg)
    print(f"evidence written to {bundle.output_dir}")
    return 0 if bundle.ok else 1


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    bundle = run_scenario(cfg)
    _print_cells(bundle)
    print(f"bundle written to {bundle.output_dir}")
    return 0 if bundle.ok else 1


def cmd_roc(args) -> int:
    out, missing = render_roc(args.bundle, with_dp_bound=not args.no_dp_bound, regimes=args.curves, out_name=args.name)
    for name in missing:
        print(f"missing curve: {name}", file=sys.stderr)
    print(out)
    return 0


def cmd_stability(args) -> int:
    cfg = _config(args)
    spec = problem_for(cfg)
    est = estimate_stability(
        spec,
        cfg.trainer,
        args.n_train,
        args.n_perturb,
        args.n_test,
        cfg.master_seed,
        n_train_seeds=args.train_seeds,
    )
    bound = theorem_deviation(est.alpha_hat, est.beta_hat, args.n_eval, args.t)
    doc = est.to_dict()
    doc["deviation_bound"] = {"value": bound, "n": args.n_eval, "t": args.t, "constant": "xC, C unknown"}
    text = json.dumps(doc, indent=2)
    if args.output:
        Path(args.output).write_text(text)
    print(text)
    return 0


def cmd_report(args) -> int:
    bundle = aggregate_bundles(args.bundles, args.out)
    _print_cells(bundle)
    return 0 if bundle.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="causalmia", description="Causal evaluation of membership inference attacks")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate and score evidence only")
    _add_config_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="run a full scenario and write a bundle")
    _add_config_args(p)
    p.add_argument("--svg", action="store_true", help="also render roc.svg")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("roc", help="render a bundle's ROC curves to SVG")
    p.add_argument("bundle", type=Path)
    p.add_argument("--no-dp-bound", action="store_true")
    p.add_argument("--curves", nargs="*", help="curve names like ZeroRunRaw_Classical (default: all)")
    p.add_argument("--name", default="roc.svg")
    p.set_defaults(func=cmd_roc)

    p = sub.add_parser("stability", help="estimate error and training stability")
    _add_config_args(p, with_out=False)
    p.add_argument("--n-train", type=int, default=200)
    p.add_argument("--n-perturb", type=int, default=10)
    p.add_argument("--n-test", type=int, default=1000)
    p.add_argument("--train-seeds", type=int, default=5)
    p.add_argument("--n-eval", type=int, default=400, help="evidence size n in the deviation bound")
    p.add_argument("--t", type=float, default=3.0)
    p.add_argument("--output", type=Path)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("report", help="re-aggregate one or more bundles")
    p.add_argument("bundles", nargs="+", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
