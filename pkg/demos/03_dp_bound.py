"""A drifted audit appears to break differential privacy.

DP-SGD with clipping 1, noise multiplier sqrt(3), 75 epochs and batch 128 is
labelled (0.602, 0.01)-DP. No attack can have an ROC curve above
``min(1, e^eps x + delta, 1 - e^-eps (1 - delta - x))``. The raw zero-run
curve crosses that ceiling because of the shift; the oracle-IPW curve does not.

Writes ``demo_dp/`` in the current directory with the bundle and ``roc.svg``. Run with
``python demos/03_dp_bound.py`` (under a minute).
"""

from causalmia.scenario import DPSGD_SCENARIO, ZERO_ORACLE, ZERO_RAW, RunConfig, run_scenario

cfg = RunConfig.for_scenario(
    DPSGD_SCENARIO,
    regimes=(ZERO_RAW, ZERO_ORACLE),
    estimators=("Classical", "IPW"),
    repetitions=3,
    output_dir="demo_dp",
    svg=True,
)
bundle = run_scenario(cfg)
for regime, est in ((ZERO_RAW, "Classical"), (ZERO_ORACLE, "IPW")):
    auc = bundle.values(regime, est, "auc")
    excess = bundle.values(regime, est, "dp_excess")
    print(f"{regime:14s} {est:9s} AUC {auc.mean():.3f}  largest rise above the DP bound {excess.max():+.3f}")
print(f"plot: {bundle.output_dir / 'roc.svg'}")
