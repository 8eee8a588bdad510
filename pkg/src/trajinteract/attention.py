"""Physical closeness index and the normalised attention matrix over categories x time."""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateGeometryError, InvalidInputError
from .geometry import CaState, clamp_tau, closest_approach_time, closest_distance
from .selection import CATEGORIES, InteractionTensor
from .state import Vec2

logger = logging.getLogger(__name__)

PARTS = ("ab", "a", "b")


@dataclass(frozen=True)
class CoefficientConfig:
    """``part`` picks the full index ("ab"), inverse distance only ("a") or approach rate only ("b")."""

    horizon_T: float = 30.0
    epsilon: float = 1.0
    part: str = "ab"

    # tau's lower bound is fixed at 0
    tau_lower = 0.0

    def __post_init__(self):
        if not self.horizon_T > 0:
            raise InvalidInputError("horizon_T must be > 0")
        if not self.epsilon > 0:
            raise InvalidInputError("epsilon must be > 0")
        if self.part not in PARTS:
            raise InvalidInputError(f"part must be one of {PARTS}, got {self.part!r}")


@dataclass
class AttentionMatrix:
    alpha: np.ndarray  # (4, T_h), rows SL, FL, FF, ML

    def to_csv(self) -> str:
        T_h = self.alpha.shape[1]
        buf = io.StringIO()
        buf.write(",".join(["category"] + [f"t={t}" for t in range(-T_h + 1, 1)]) + "\n")
        for name, row in zip(CATEGORIES, self.alpha):
            buf.write(",".join([name] + [repr(float(v)) for v in row]) + "\n")
        return buf.getvalue()


def closeness_index(target: CaState, other: CaState,
                    cfg: CoefficientConfig = CoefficientConfig()) -> float:
    """Closeness of ``other`` to ``target``: inverse distance times normalised approach rate.

    Can be negative when the clamped closest gap exceeds the current one by more than epsilon.
    """
    d_now = closest_distance(target, other, 0.0)
    if d_now == 0.0:
        raise DegenerateGeometryError("collocated agents: current distance is zero")
    if cfg.part == "a":
        return 1.0 / d_now
    tau_bar = clamp_tau(closest_approach_time(target, other), cfg.horizon_T)
    d_next = closest_distance(target, other, tau_bar)
    rate = (d_now - d_next + cfg.epsilon) / (tau_bar + cfg.epsilon)
    if cfg.part == "b":
        return rate
    return rate / d_now


def normalize_scores(c: Sequence[float], mask: Sequence[bool] | None = None) -> np.ndarray:
    """Normalise populated category scores to sum to one; all-zero or empty gives zeros."""
    c = np.asarray(c, dtype=float)
    mask = np.ones(c.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    if np.any(c < 0) or not np.all(np.isfinite(c)):
        raise InvalidInputError(f"closeness scores must be finite and >= 0, got {c.tolist()}")
    vals = np.where(mask, c, 0.0)
    total = vals.sum()
    if total == 0.0:
        return np.zeros_like(vals)
    return vals / total


def _ca(row: np.ndarray) -> CaState:
    return CaState(Vec2(row[0], row[1]), Vec2(row[3], row[4]), Vec2(row[5], row[6]))


def attention_matrix(tensor: InteractionTensor,
                     cfg: CoefficientConfig = CoefficientConfig()) -> AttentionMatrix:
    T_h = tensor.T_h
    alpha = np.zeros((4, T_h))
    for t in range(T_h):
        if not tensor.mask[:, t].any():
            continue
        target = _ca(tensor.slots[0, t])
        scores = np.zeros(4)
        for s in range(4):
            if not tensor.mask[s, t]:
                continue
            try:
                c = closeness_index(target, _ca(tensor.slots[s + 1, t]), cfg)
            except DegenerateGeometryError as exc:
                raise DegenerateGeometryError(
                    f"t={t - T_h + 1}, category={CATEGORIES[s]}: {exc}") from exc
            if c < 0:
                logger.info("t=%d %s: negative closeness %.6g clamped to 0",
                            t - T_h + 1, CATEGORIES[s], c)
                c = 0.0
            scores[s] = c
        alpha[:, t] = normalize_scores(scores, tensor.mask[:, t])
    return AttentionMatrix(alpha)

