import numpy as np
import pytest

import causalmia.protocols as protocols
from causalmia.attacks import MEMBER_HIGH, RAW_LOSS, AttackSpec, flip, score, scores
from causalmia.estimators import auc_pairwise, classical_roc
from causalmia.protocols import (
    BALANCED,
    BERNOULLI,
    AssignmentMode,
    EvidenceSet,
    run_multirun,
    run_onerun,
    run_zerorun,
)
from causalmia.synthgen import Dataset, LabeledPoint, make_problem, sample_members, sample_shifted
from causalmia.trainers import DPSGD, RIDGE, ModelParams, TrainerConfig, train_ridge

RIDGE_CFG = TrainerConfig(RIDGE, ridge_lambda=10.0)


def test_score_examples_and_orientation():
    theta = ModelParams(np.array([1.0]))
    point = LabeledPoint(np.array([1.0]), 1.0)
    assert score(AttackSpec(), theta, point) == 0.0
    assert score(AttackSpec(orientation=MEMBER_HIGH), theta, point) == 0.0
    data = Dataset(np.array([[1.0], [2.0]]), np.array([0.0, 0.0]), 1)
    raw = scores(AttackSpec(), theta, data)
    np.testing.assert_array_equal(scores(AttackSpec().oriented(MEMBER_HIGH), theta, data), -raw)
    np.testing.assert_array_equal(flip(raw, RAW_LOSS, MEMBER_HIGH), -raw)
    np.testing.assert_array_equal(flip(raw, RAW_LOSS, RAW_LOSS), raw)
    with pytest.raises(ValueError):
        AttackSpec(kind="Shadow")
    with pytest.raises(ValueError):
        scores(AttackSpec(), ModelParams(np.zeros(2)), data)


def test_orientation_flip_mirrors_auc(rng):
    y1, y0 = rng.normal(size=30), rng.normal(0.4, 1, size=40)
    from conftest import make_evidence

    ev = make_evidence(y1, y0)
    flipped = ev.oriented(MEMBER_HIGH)
    assert auc_pairwise(flipped) == pytest.approx(1 - auc_pairwise(ev), abs=1e-15)
    assert flipped.oriented(RAW_LOSS).y.tolist() == ev.y.tolist()


def test_multirun_balanced_counts_and_determinism():
    spec = make_problem(0, 20, 0.9)
    ev = run_multirun(spec, RIDGE_CFG, AttackSpec(), 50, 40, seed=3)
    assert ev.n1 == ev.n0 == 20 and ev.n_trainings == 40
    assert ev.a[:20].all() and not ev.a[20:].any()
    again = run_multirun(spec, RIDGE_CFG, AttackSpec(), 50, 40, seed=3)
    np.testing.assert_array_equal(ev.y, again.y)


def test_multirun_fast_ridge_matches_retraining():
    spec = make_problem(0, 20, 0.9)
    fast = run_multirun(spec, RIDGE_CFG, AttackSpec(), 30, 10, seed=1)
    slow = run_multirun(spec, RIDGE_CFG, AttackSpec(), 30, 10, seed=1, fast_ridge=False)
    np.testing.assert_allclose(fast.y, slow.y, rtol=1e-9, atol=1e-10)


def test_multirun_runs_are_order_independent():
    spec = make_problem(0, 8, 0.9)
    base = sample_members(spec, 20, protocols.rng_for(2, "base"))
    forward = [protocols._multirun_one(i, spec, RIDGE_CFG, AttackSpec(), base, i % 2, 2, None) for i in range(6)]
    backward = [protocols._multirun_one(i, spec, RIDGE_CFG, AttackSpec(), base, i % 2, 2, None) for i in reversed(range(6))]
    assert [r[1] for r in forward] == [r[1] for r in reversed(backward)]


def test_multirun_parallel_matches_serial():
    spec = make_problem(0, 6, 0.9)
    cfg = TrainerConfig(DPSGD, epochs=2, batch_size=8)
    serial = run_multirun(spec, cfg, AttackSpec(), 16, 6, seed=4, n_jobs=1)
    parallel = run_multirun(spec, cfg, AttackSpec(), 16, 6, seed=4, n_jobs=2)
    np.testing.assert_array_equal(serial.y, parallel.y)


def test_multirun_bernoulli_two_records():
    spec = make_problem(0, 4, 0.9)
    a = run_multirun(spec, RIDGE_CFG, AttackSpec(), 5, 2, AssignmentMode(BERNOULLI), seed=9)
    b = run_multirun(spec, RIDGE_CFG, AttackSpec(), 5, 2, AssignmentMode(BERNOULLI), seed=9)
    assert len(a) == 2
    np.testing.assert_array_equal(a.a, b.a)


def test_multirun_reports_failing_run():
    def broken(data, seed):
        raise RuntimeError("boom")

    with pytest.raises(RuntimeError, match="run 0"):
        run_multirun(make_problem(0, 4, 0.9), broken, AttackSpec(), 5, 2, seed=0)


def test_onerun_single_model_and_counts(monkeypatch):
    calls = []
    real = protocols.train

    def counting(data, trainer, seed=None):
        calls.append(len(data))
        return real(data, trainer, seed)

    monkeypatch.setattr(protocols, "train", counting)
    spec = make_problem(0, 30, 0.9)
    ev = run_onerun(spec, RIDGE_CFG, AttackSpec(), 400, seed=2)
    assert ev.n1 == ev.n0 == 200
    assert calls == [200]
    np.testing.assert_allclose(ev.model.weights, train_ridge(Dataset(ev.features[ev.a == 1], ev.labels[ev.a == 1], 30), 10.0).weights)


def test_onerun_bernoulli_minimal_and_degenerate():
    spec = make_problem(0, 3, 0.9)
    ev = run_onerun(spec, RIDGE_CFG, AttackSpec(), 2, AssignmentMode(BERNOULLI), seed=1)
    assert len(ev) == 2 and ev.n_trainings == 1
    # an all-out draw is collected and only fails at estimation time
    empty = run_onerun(spec, RIDGE_CFG, AttackSpec(), 2, AssignmentMode(BERNOULLI, p=0.0), seed=1)
    assert empty.n1 == 0
    with pytest.raises(ValueError, match="no members"):
        classical_roc(empty)


def test_zerorun_never_trains(monkeypatch):
    monkeypatch.setattr(protocols, "train", lambda *a, **k: pytest.fail("zero-run trained a model"))
    spec = make_problem(0, 5, 0.9)
    theta = ModelParams(np.ones(5))
    ev = run_zerorun(theta, sample_members(spec, 10, 1), sample_shifted(spec, 12, 2), AttackSpec())
    assert ev.n1 == 10 and ev.n0 == 12 and ev.n_trainings == 0
    with pytest.raises(ValueError):
        run_zerorun(ModelParams(np.ones(4)), sample_members(spec, 1, 1), sample_shifted(spec, 1, 1), AttackSpec())


def test_zerorun_without_shift_matches_onerun_model_scores():
    spec = make_problem(0, 30, 0.9)
    one = run_onerun(spec, RIDGE_CFG, AttackSpec(), 600, seed=5)
    nospec = spec.with_shift(np.zeros(30))
    members = Dataset(one.features[one.a == 1], one.labels[one.a == 1], 30)
    zero = run_zerorun(one.model, members, sample_shifted(nospec, 300, 8), AttackSpec())
    assert abs(auc_pairwise(zero) - auc_pairwise(one)) < 0.08


def test_assignment_and_evidence_validation():
    with pytest.raises(ValueError):
        AssignmentMode("Coin")
    with pytest.raises(ValueError):
        AssignmentMode(BALANCED).assign(3, np.random.default_rng(0))
    with pytest.raises(ValueError):
        EvidenceSet(np.zeros((2, 1)), np.zeros(2), [1, 2], [0.0, 1.0], "X")
    with pytest.raises(ValueError):
        EvidenceSet(np.zeros((2, 1)), np.zeros(2), [1, 0], [0.0, np.nan], "X")


def test_evidence_serialisation_and_normalisation(tmp_path, rng):
    from conftest import make_evidence

    ev = make_evidence(rng.normal(size=5), rng.normal(size=4), x1=rng.normal(size=(5, 2)), x0=rng.normal(size=(4, 2)))
    back = EvidenceSet.from_json(ev.to_json(dump_features=True))
    np.testing.assert_array_equal(back.features, ev.features)
    np.testing.assert_array_equal(back.y, ev.y)
    ev.to_csv(tmp_path / "ev.csv")
    from_csv = EvidenceSet.from_csv(tmp_path / "ev.csv")
    np.testing.assert_array_equal(from_csv.y, ev.y)
    norm = ev.normalize()
    assert norm.normalized and norm.y.min() == 0.0 and norm.y.max() == 1.0
    np.testing.assert_allclose(norm.oriented(MEMBER_HIGH).y, 1 - norm.y)
