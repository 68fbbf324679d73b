from dataclasses import replace

import numpy as np
import pytest

from causalmia.attacks import AttackSpec
from causalmia.estimators import ate_dim
from causalmia.protocols import run_onerun
from causalmia.stability import (
    StabilityEstimate,
    estimate_error_stability,
    estimate_stability,
    estimate_training_stability,
    theorem_deviation,
)
from causalmia.synthgen import make_problem
from causalmia.trainers import DPSGD, RIDGE, TrainerConfig, constant_trainer


def test_constant_trainer_is_perfectly_stable():
    spec = make_problem(0, 6, 0.9)
    est = estimate_stability(spec, constant_trainer(np.ones(6)), 20, 5, 100, seed=1)
    assert est.alpha_hat == 0.0 and est.beta_hat == 0.0


def test_error_stability_shrinks_with_training_size():
    cfg = TrainerConfig(RIDGE, ridge_lambda=1e3)
    small, large = [], []
    for seed in range(10):
        spec = make_problem(seed, 50, 0.9)
        small.append(estimate_error_stability(spec, cfg, 200, 5, 2000, seed).alpha_hat)
        large.append(estimate_error_stability(spec, cfg, 2000, 5, 2000, seed).alpha_hat)
    assert np.median(large) < np.median(small)


def test_interpolating_ridge_has_near_zero_training_stability():
    spec = make_problem(0, 400, 0.9)
    beta = estimate_training_stability(spec, TrainerConfig(RIDGE, ridge_lambda=1e-8), 20, 5, seed=3).beta_hat
    loose = estimate_training_stability(spec, TrainerConfig(RIDGE, ridge_lambda=1e3), 20, 5, seed=3).beta_hat
    assert 0.0 <= beta < 1e-6
    assert loose > 1e3 * beta


def test_randomized_trainer_reports_standard_error():
    spec = make_problem(0, 5, 0.9)
    cfg = TrainerConfig(DPSGD, epochs=2, batch_size=8, noise_sd=5.0)
    est = estimate_error_stability(spec, cfg, 16, 3, 200, seed=0, n_train_seeds=4)
    assert est.alpha_hat >= 0 and est.alpha_se > 0


def test_estimates_are_deterministic_and_serialisable():
    spec = make_problem(0, 8, 0.9)
    cfg = TrainerConfig(RIDGE, ridge_lambda=5.0)
    a = estimate_stability(spec, cfg, 30, 4, 200, seed=2)
    b = estimate_stability(spec, cfg, 30, 4, 200, seed=2)
    assert a == b
    assert StabilityEstimate.from_json(a.to_json()) == a
    assert a.trainer_fingerprint == cfg.fingerprint


def test_stability_input_validation():
    spec = make_problem(0, 4, 0.9)
    cfg = TrainerConfig(RIDGE, ridge_lambda=1.0)
    with pytest.raises(ValueError):
        estimate_error_stability(spec, cfg, 1, 2, 10)
    with pytest.raises(ValueError):
        estimate_training_stability(spec, cfg, 2, 2)
    with pytest.raises(ValueError):
        estimate_error_stability(spec, cfg, 5, 0, 10)


def test_theorem_deviation_examples():
    assert theorem_deviation(0, 0, 100, 1) == pytest.approx(0.1)
    assert theorem_deviation(0, 0, 100, 1, eta=0.1) == pytest.approx(1.0)
    assert theorem_deviation(0.01, 0.02, 100, 1, delta_pi=0.5) == pytest.approx(0.1 + 0.1 + 0.2 + 0.5)
    with pytest.raises(ValueError):
        theorem_deviation(0, 0, 0, 1)
    with pytest.raises(ValueError):
        theorem_deviation(0, 0, 10, 1, eta=0.7)


def test_one_run_deviation_within_order_of_magnitude_of_bound():
    """No-shift one-run error against 10x the stability bound at t = 3, 100 seeds."""
    spec = make_problem(0, 20, 0.9)
    cfg = TrainerConfig(RIDGE, ridge_lambda=50.0)
    n = 200
    scale = 50.0  # losses are divided by this and clipped, so scores lie in [0, 1]
    ests = []
    for seed in range(100):
        ev = run_onerun(spec, cfg, AttackSpec(), n, seed=seed)
        ests.append(ate_dim(replace(ev, y=np.minimum(ev.y / scale, 1.0), normalized=True)))
    truth = float(np.mean(ests))
    stab = estimate_stability(spec, cfg, n // 2, 10, 2000, seed=1)
    bound = theorem_deviation(stab.alpha_hat / scale, stab.beta_hat / scale, n, 3.0)
    assert np.max(np.abs(np.array(ests) - truth)) <= 10 * bound
