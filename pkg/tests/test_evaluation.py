import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from builders import agent
from trajinteract.errors import InvalidInputError
from trajinteract.evaluation import (DIVERSITY_LAMBDA, GaussianParams, PredictionSet, loss_distance,
                                     loss_diversity, min_ade, min_fde, predict_ca, predict_cv,
                                     reparameterize, rmse, rmse_by_horizon, total_loss)
from trajinteract.synth import SynthSpec, synthesize


def _const(offset, T_f=4, gt=None):
    gt = np.zeros((T_f, 2)) if gt is None else gt
    return PredictionSet(gt + np.asarray(offset, float)), gt


def test_predict_cv_offsets():
    pred = predict_cv([agent(0, (0.0, 0.0), (1.0, 0.0))], 3, 0.2)
    np.testing.assert_allclose(pred.trajectories[0], [[0.2, 0], [0.4, 0], [0.6, 0]], atol=1e-12)


def test_predict_cv_zero_velocity():
    pred = predict_cv([agent(0, (3.0, -1.0))], 5, 0.1)
    assert np.all(pred.trajectories[0] == [3.0, -1.0])


def test_predict_ca_examples():
    pred = predict_ca([agent(0, (0.0, 0.0), (0.0, 0.0), (2.0, 0.0))], 2, 1.0)
    assert pred.trajectories[0, 1].tolist() == [4.0, 0.0]
    s = agent(0, (1.0, 2.0), (3.0, -1.0))
    np.testing.assert_array_equal(predict_ca([s], 7, 0.1).trajectories, predict_cv([s], 7, 0.1).trajectories)


@pytest.mark.parametrize("motion, model", [("cv", predict_cv), ("ca", predict_ca)])
def test_matching_model_has_zero_rmse(motion, model):
    result = synthesize(SynthSpec(seed=3, motion=motion, n_windows=4))
    preds = [model([f.target for f in s.scene.frames], 30, 0.1) for s in result.samples]
    assert rmse(preds, [s.future for s in result.samples]) == 0.0


def test_reparameterize_examples():
    mu = np.arange(12.0).reshape(2, 3, 2)
    z = np.ones((2, 3, 2))
    np.testing.assert_array_equal(reparameterize(GaussianParams(mu, np.zeros((2, 3)), z)).trajectories, mu)
    np.testing.assert_array_equal(reparameterize(GaussianParams(mu, np.ones((2, 3)), 0 * z)).trajectories, mu)
    np.testing.assert_array_equal(
        reparameterize(GaussianParams(0 * mu, np.full((2, 3), 2.0), z)).trajectories, 2 * z)
    with pytest.raises(InvalidInputError):
        GaussianParams(mu, -np.ones((2, 3)), z)


def test_loss_distance_examples():
    gt = np.random.default_rng(0).normal(size=(4, 2))
    good = PredictionSet(np.stack([gt + 1.0, gt]))
    assert loss_distance(good, gt) == 0.0
    pred, gt0 = _const((3.0, 4.0))
    assert loss_distance(pred, gt0) == 5.0
    two = PredictionSet(np.stack([np.full((4, 2), [3.0, 4.0]), np.full((4, 2), [0.0, 2.0])]))
    assert loss_distance(two, np.zeros((4, 2))) == 2.0


def test_loss_diversity_examples():
    pred, gt = _const((0.0, 0.0))
    assert loss_diversity(pred, gt, 1.0) == 0.0
    assert loss_diversity(pred, gt, math.e) == pytest.approx(2.0, abs=1e-15)
    one, gt1 = _const((4.0, 0.0), T_f=1)
    assert loss_diversity(one, gt1, 2.0) == 1.0 + math.log(4.0)


def test_total_loss_weighting():
    pred, gt = _const((3.0, 4.0))
    expected = 5.0 + DIVERSITY_LAMBDA * (20.0 / (4 * 4) + math.log(4.0))
    assert total_loss(pred, gt, 2.0) == pytest.approx(expected, abs=1e-15)
    assert DIVERSITY_LAMBDA == 0.02


def test_min_ade_fde_examples():
    pred, gt = _const((3.0, 4.0))
    assert (min_ade(pred, gt), min_fde(pred, gt)) == (5.0, 5.0)
    gt = np.zeros((3, 2))
    a = np.array([[1.0, 0], [1.0, 0], [1.0, 0]])  # mean 1, final 1
    b = np.array([[0.0, 0], [0.0, 0], [0.5, 0]]) + np.array([[4.0, 0], [0, 0], [0, 0]])  # mean 1.5, final 0.5
    pred = PredictionSet(np.stack([a, b]))
    per_mode_ade = [np.mean(np.linalg.norm(m - gt, axis=1)) for m in (a, b)]
    per_mode_fde = [np.linalg.norm(m[-1] - gt[-1]) for m in (a, b)]
    assert min_ade(pred, gt) == min(per_mode_ade) == 1.0
    assert min_fde(pred, gt) == min(per_mode_fde) == 0.5


def test_rmse_examples():
    gt = np.zeros((1, 2))
    assert rmse([PredictionSet(gt)], [gt]) == 0.0
    assert rmse([PredictionSet([[3.0, 4.0]])], [gt]) == 5.0
    assert rmse([PredictionSet([[3.0, 0.0]]), PredictionSet([[0.0, 4.0]])], [gt, gt]) == math.sqrt(12.5)


def test_rmse_rejects_multimodal():
    gt = np.zeros((2, 2))
    with pytest.raises(InvalidInputError):
        rmse([PredictionSet(np.zeros((2, 2, 2)))], [gt])


def test_rmse_by_horizon_buckets():
    rng = np.random.default_rng(1)
    gts = [rng.normal(size=(25, 2)) for _ in range(3)]
    preds = [PredictionSet(g + rng.normal(size=g.shape)) for g in gts]
    buckets = rmse_by_horizon(preds, gts, 0.2)
    assert list(buckets) == [1.0, 2.0, 3.0, 4.0, 5.0]
    step = 10  # 2 s at dt = 0.2
    direct = math.sqrt(sum(float(np.sum((p.trajectories[0, step - 1] - g[step - 1]) ** 2))
                           for p, g in zip(preds, gts)) / 3)
    assert buckets[2.0] == pytest.approx(direct, abs=1e-12)


def test_duplicate_modes_do_not_change_min_ade():
    rng = np.random.default_rng(2)
    gt = rng.normal(size=(6, 2))
    one = PredictionSet(gt + rng.normal(size=gt.shape))
    six = PredictionSet(np.repeat(one.trajectories, 6, axis=0))
    assert min_ade(six, gt) == min_ade(one, gt)


@settings(max_examples=100, deadline=None)
@given(arrays(float, (3, 5, 2), elements=st.floats(-100, 100)),
       arrays(float, (5, 2), elements=st.floats(-100, 100)))
def test_min_metrics_bounded_by_each_mode(traj, gt):
    pred = PredictionSet(traj)
    err = np.linalg.norm(traj - gt, axis=2)
    assert min_ade(pred, gt) <= err.mean(axis=1).min() + 1e-12
    assert min_fde(pred, gt) <= err[:, -1].min() + 1e-12
    assert loss_distance(pred, gt) == pytest.approx(min_ade(pred, gt), rel=1e-12, abs=1e-12)


def test_shape_mismatch():
    with pytest.raises(InvalidInputError):
        min_ade(PredictionSet(np.zeros((3, 2))), np.zeros((4, 2)))
