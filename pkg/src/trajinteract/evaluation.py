"""Kinematic baselines, reparameterised decoding, WTA/diversity losses and displacement metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError
from .state import AgentState

DIVERSITY_LAMBDA = 0.02


@dataclass(frozen=True)
class PredictionSet:
    trajectories: np.ndarray  # (K, T_f, 2)

    def __post_init__(self):
        traj = np.asarray(self.trajectories, dtype=float)
        if traj.ndim == 2:
            traj = traj[None]
        if traj.ndim != 3 or traj.shape[2] != 2 or traj.shape[0] < 1:
            raise InvalidInputError(f"predictions must be K x T_f x 2, got {traj.shape}")
        if not np.all(np.isfinite(traj)):
            raise InvalidInputError("non-finite prediction")
        object.__setattr__(self, "trajectories", traj)

    @property
    def modes(self) -> int:
        return self.trajectories.shape[0]

    @property
    def T_f(self) -> int:
        return self.trajectories.shape[1]


@dataclass(frozen=True)
class GaussianParams:
    mu: np.ndarray  # (K, T_f, 2)
    sigma: np.ndarray  # (K, T_f)
    z: np.ndarray  # (K, T_f, 2)

    def __post_init__(self):
        mu, sigma, z = (np.asarray(a, dtype=float) for a in (self.mu, self.sigma, self.z))
        if mu.shape != z.shape or mu.shape[:2] != sigma.shape or mu.ndim != 3:
            raise InvalidInputError(f"inconsistent shapes mu{mu.shape} sigma{sigma.shape} z{z.shape}")
        if np.any(sigma < 0):
            raise InvalidInputError("sigma must be non-negative")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "z", z)


def _rollout(state: AgentState, T_f: int, dt: float, with_accel: bool) -> PredictionSet:
    if dt <= 0 or T_f < 1:
        raise InvalidInputError("need dt > 0 and T_f >= 1")
    px, py = state.position.x, state.position.y
    vx, vy = state.velocity.x, state.velocity.y
    ax, ay = (state.acceleration.x, state.acceleration.y) if with_accel else (0.0, 0.0)
    half_dt2 = 0.5 * dt * dt
    out = np.empty((T_f, 2))
    # stepwise recursion; exact for CV/CA in exact arithmetic
    for k in range(T_f):
        px += vx * dt + ax * half_dt2
        py += vy * dt + ay * half_dt2
        vx += ax * dt
        vy += ay * dt
        out[k] = (px, py)
    return PredictionSet(out[None])


def predict_cv(history: Sequence[AgentState], T_f: int, dt: float) -> PredictionSet:
    """Constant-velocity extrapolation of the last observed state."""
    if not history:
        raise InvalidInputError("history must be non-empty")
    return _rollout(history[-1], T_f, dt, with_accel=False)


def predict_ca(history: Sequence[AgentState], T_f: int, dt: float) -> PredictionSet:
    """Constant-acceleration extrapolation of the last observed state."""
    if not history:
        raise InvalidInputError("history must be non-empty")
    return _rollout(history[-1], T_f, dt, with_accel=True)


def reparameterize(g: GaussianParams) -> PredictionSet:
    return PredictionSet(g.mu + g.sigma[..., None] * g.z)


def _gt(gt, T_f: int) -> np.ndarray:
    gt = np.asarray(gt, dtype=float)
    if gt.shape != (T_f, 2):
        raise InvalidInputError(f"ground truth must be {T_f} x 2, got {gt.shape}")
    return gt


def step_errors(pred: PredictionSet, gt) -> np.ndarray:
    """Per-mode, per-step Euclidean errors, shape (K, T_f)."""
    gt = _gt(gt, pred.T_f)
    diff = pred.trajectories - gt[None]
    return np.hypot(diff[..., 0], diff[..., 1])


def loss_distance(pred: PredictionSet, gt) -> float:
    """Winner-takes-all reconstruction loss: best mode's summed error over T_f."""
    return float(step_errors(pred, gt).sum(axis=1).min() / pred.T_f)


def loss_diversity(pred: PredictionSet, gt, sigma: float) -> float:
    if not sigma > 0:
        raise InvalidInputError("sigma must be positive")
    err = step_errors(pred, gt)
    var = sigma * sigma
    return float(err.sum() / (var * pred.modes * pred.T_f) + math.log(var))


def total_loss(pred: PredictionSet, gt, sigma: float, lam: float = DIVERSITY_LAMBDA) -> float:
    if lam < 0:
        raise InvalidInputError("lambda must be >= 0")
    return loss_distance(pred, gt) + lam * loss_diversity(pred, gt, sigma)


def min_ade(pred: PredictionSet, gt) -> float:
    return float(step_errors(pred, gt).mean(axis=1).min())


def min_fde(pred: PredictionSet, gt) -> float:
    return float(step_errors(pred, gt)[:, -1].min())


def _single_mode_errors(preds: Sequence[PredictionSet], gts) -> np.ndarray:
    if len(preds) != len(gts) or not preds:
        raise InvalidInputError("need equally many (>0) predictions and ground truths")
    rows = []
    for pred, gt in zip(preds, gts):
        if pred.modes != 1:
            raise InvalidInputError("RMSE expects unimodal predictions")
        rows.append(step_errors(pred, gt)[0])
    return np.stack(rows)  # (N, T_f)


def rmse(preds: Sequence[PredictionSet], gts) -> float:
    err = _single_mode_errors(preds, gts)
    return float(np.sqrt(np.mean(err ** 2)))


def rmse_by_horizon(preds: Sequence[PredictionSet], gts, dt: float,
                    horizons: Sequence[float] | None = None) -> dict[float, float]:
    """RMSE of the predicted point at each horizon (seconds), over all samples.

    Default horizons are whole seconds 1..floor(T_f * dt).
    """
    err = _single_mode_errors(preds, gts)
    T_f = err.shape[1]
    if horizons is None:
        horizons = [float(s) for s in range(1, int(math.floor(T_f * dt + 1e-9)) + 1)]
    out = {}
    for h in horizons:
        step = int(round(h / dt))
        if not 1 <= step <= T_f:
            raise InvalidInputError(f"horizon {h}s outside prediction window")
        out[float(h)] = float(np.sqrt(np.mean(err[:, step - 1] ** 2)))
    return out
