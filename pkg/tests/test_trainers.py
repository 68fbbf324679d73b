import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causalmia.synthgen import Dataset, LabeledPoint, make_problem, rng_for, sample_members
from causalmia.trainers import (
    DPSGD,
    RIDGE,
    ModelParams,
    RidgeUpdater,
    TrainerConfig,
    constant_trainer,
    loss,
    losses,
    ridge_loo_predictions,
    train,
    train_dpsgd,
    train_ridge,
)


def _random_data(rng, n, d):
    return Dataset(rng.normal(size=(n, d)), rng.normal(size=n), d)


def test_one_point_scalar_ridge():
    theta = train_ridge(Dataset(np.array([[1.0]]), np.array([2.0]), 1), 1.0)
    np.testing.assert_allclose(theta.weights, [1.0], atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 12), d=st.integers(1, 12), lam=st.floats(1e-2, 1e3))
def test_ridge_matches_primal_normal_equations(seed, n, d, lam):
    data = _random_data(np.random.default_rng(seed), n, d)
    a, b = data.features, data.labels
    want = np.linalg.solve(a.T @ a + lam * np.eye(d), a.T @ b)
    np.testing.assert_allclose(train_ridge(data, lam).weights, want, atol=1e-8, rtol=1e-8)


def test_dual_solution_matches_primal_d8_n5(rng):
    data = _random_data(rng, 5, 8)
    a, b = data.features, data.labels
    primal = np.linalg.solve(a.T @ a + np.eye(8), a.T @ b)
    dual = a.T @ np.linalg.solve(a @ a.T + np.eye(5), b)
    np.testing.assert_allclose(train_ridge(data, 1.0).weights, primal, atol=1e-8)
    np.testing.assert_allclose(dual, primal, atol=1e-8)


def test_ridge_norm_shrinks_with_lambda(rng):
    data = _random_data(rng, 20, 40)
    norms = [np.linalg.norm(train_ridge(data, lam).weights) for lam in np.logspace(-2, 8, 30)]
    assert np.all(np.diff(norms) < 0)
    assert norms[-1] < 1e-6


def test_ridge_rejects_bad_input():
    with pytest.raises(ValueError):
        train_ridge(Dataset.empty(3), 1.0)
    with pytest.raises(ValueError):
        train_ridge(Dataset(np.ones((1, 1)), np.ones(1), 1), 0.0)
    with pytest.raises(ValueError):
        TrainerConfig(RIDGE, ridge_lambda=-1.0)


def test_rank_one_update_matches_refit(rng):
    base = _random_data(rng, 30, 50)
    upd = RidgeUpdater(base, 10.0)
    point = LabeledPoint(rng.normal(size=50), 0.7)
    want = train_ridge(base.concat(Dataset.from_points([point])), 10.0).weights
    np.testing.assert_allclose(upd.with_point(point).weights, want, atol=1e-10)
    np.testing.assert_allclose(upd.without_point().weights, train_ridge(base, 10.0).weights, atol=1e-12)


def test_rank_one_update_from_empty_base(rng):
    upd = RidgeUpdater(Dataset.empty(4), 2.0)
    point = LabeledPoint(rng.normal(size=4), 1.5)
    want = train_ridge(Dataset.from_points([point]), 2.0).weights
    np.testing.assert_allclose(upd.with_point(point).weights, want, atol=1e-12)


def test_leave_one_out_predictions_match_refits(rng):
    data = _random_data(rng, 12, 30)
    got = ridge_loo_predictions(data, 3.0)
    for i in range(len(data)):
        rest = data.subset(np.delete(np.arange(len(data)), i))
        want = data.features[i] @ train_ridge(rest, 3.0).weights
        assert got[i] == pytest.approx(want, abs=1e-9)


def _dp_cfg(**kw):
    base = dict(variant=DPSGD, lr=0.01, epochs=3, batch_size=16, clip_norm=1.0, noise_sd=np.sqrt(3.0), l2_lambda=10.0)
    base.update(kw)
    return TrainerConfig(**base)


def test_dpsgd_compiled_kernel_matches_numpy_reference():
    spec = make_problem(1, 25, 0.9)
    data = sample_members(spec, 100, 2)
    cfg = _dp_cfg()
    a = train_dpsgd(data, cfg, 7, backend="numpy").weights
    b = train_dpsgd(data, cfg, 7).weights
    np.testing.assert_allclose(b, a, atol=1e-10)


def test_dpsgd_reduces_to_one_gradient_step(rng):
    data = _random_data(rng, 20, 5)
    cfg = _dp_cfg(noise_sd=0.0, clip_norm=np.inf, epochs=1, batch_size=20, lr=1e-3, l2_lambda=0.5)
    got = train_dpsgd(data, cfg, 0).weights
    # gradient of the mean squared loss at theta = 0 is -2 A'b / n
    want = 1e-3 * 2 * data.features.T @ data.labels / 20
    np.testing.assert_allclose(got, want, atol=1e-15)


def test_dpsgd_clipping_bound_holds_in_every_batch():
    data = sample_members(make_problem(3, 10, 0.9, teacher_norm=5.0), 64, 1)
    seen = []
    train_dpsgd(data, _dp_cfg(clip_norm=0.25, epochs=4), 1, hook=lambda g: seen.append(np.linalg.norm(g, axis=1)))
    norms = np.concatenate(seen)
    assert len(seen) == 4 * 4
    assert norms.max() <= 0.25 * (1 + 1e-12)


def test_dpsgd_determinism_contract():
    data = sample_members(make_problem(3, 10, 0.9), 64, 1)
    cfg = _dp_cfg()
    a, b, c = (train_dpsgd(data, cfg, s).weights for s in (5, 5, 6))
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_dpsgd_rejects_large_batch_and_non_finite():
    data = sample_members(make_problem(3, 4, 0.9), 8, 1)
    with pytest.raises(ValueError):
        train_dpsgd(data, _dp_cfg(batch_size=9), 0)
    blowup = _dp_cfg(lr=1e6, clip_norm=np.inf, noise_sd=0.0, l2_lambda=0.0, epochs=200, batch_size=8)
    with pytest.raises(FloatingPointError):
        train_dpsgd(data, blowup, 0, backend="numpy")
    with pytest.raises(FloatingPointError):
        train_dpsgd(data, blowup, 0)


def test_train_dispatch_and_constant_trainer(rng):
    data = _random_data(rng, 6, 3)
    np.testing.assert_array_equal(train(data, TrainerConfig(RIDGE, ridge_lambda=2.0)).weights, train_ridge(data, 2.0).weights)
    fixed = train(data, constant_trainer([1.0, 2.0, 3.0]))
    np.testing.assert_array_equal(fixed.weights, [1.0, 2.0, 3.0])


def test_loss_examples():
    assert loss(ModelParams(np.array([1.0])), LabeledPoint(np.array([1.0]), 1.0)) == 0.0
    assert loss(ModelParams(np.array([0.0])), LabeledPoint(np.array([3.0]), 2.0)) == 4.0
    with pytest.raises(ValueError):
        loss(ModelParams(np.zeros(2)), LabeledPoint(np.zeros(3), 0.0))
    with pytest.raises(ValueError):
        losses(ModelParams(np.zeros(2)), Dataset.empty(3))


def test_training_loss_below_test_loss_when_overparameterised():
    gaps = []
    for seed in range(50):
        spec = make_problem(seed, 200, 0.9)
        tr = sample_members(spec, 40, rng_for(seed, "train"))
        te = sample_members(spec, 200, rng_for(seed, "test"))
        theta = train_ridge(tr, 1e-3)
        gaps.append(losses(theta, te).mean() - losses(theta, tr).mean())
    assert np.mean(gaps) > 0
    assert min(gaps) > 0


def test_model_and_config_serialisation(tmp_path):
    theta = ModelParams(np.array([0.1, -2.0, 3e-300]))
    assert np.array_equal(ModelParams.from_bytes(theta.to_bytes()).weights, theta.weights)
    theta.to_csv(tmp_path / "m.csv")
    np.testing.assert_array_equal(ModelParams.from_csv(tmp_path / "m.csv").weights, theta.weights)
    cfg = _dp_cfg(clip_norm=np.inf)
    assert TrainerConfig.from_json(cfg.to_json()) == cfg
    assert cfg.fingerprint != _dp_cfg().fingerprint
