"""Lane polylines, point-to-lane mapping and future-lane extraction.

The lane predictor used at inference time is a constant-acceleration rollout
mapped through :func:`map_points_to_lanes`; any trajectory predictor could be
plugged in via :func:`lanes_from_rollout`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidInputError, SchemaError
from .state import AgentState, LaneAssignment, Vec2

DEFAULT_SLACK = 0.5
# Distances closer than this are considered a tie (smallest lane id wins).
TIE_TOL = 1e-9


@dataclass(frozen=True)
class Lane:
    lane_id: int
    centerline: np.ndarray  # (n, 2), n >= 2
    width: float

    def __post_init__(self):
        pts = np.asarray(self.centerline, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise InvalidInputError(f"lane {self.lane_id}: centerline needs >= 2 xy points")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError(f"lane {self.lane_id}: non-finite centerline")
        if np.any(np.all(np.diff(pts, axis=0) == 0.0, axis=1)):
            raise InvalidInputError(f"lane {self.lane_id}: repeated consecutive centerline point")
        if not (self.width > 0 and math.isfinite(self.width)):
            raise InvalidInputError(f"lane {self.lane_id}: width must be > 0")
        pts.flags.writeable = False
        object.__setattr__(self, "centerline", pts)


class LaneGraph:
    """Immutable set of lanes keyed by id, with a flattened segment table for queries."""

    def __init__(self, lanes: Iterable[Lane], slack: float = DEFAULT_SLACK):
        by_id: dict[int, Lane] = {}
        for lane in lanes:
            if lane.lane_id in by_id:
                raise InvalidInputError(f"duplicate lane_id {lane.lane_id}")
            by_id[lane.lane_id] = lane
        self.lanes = by_id
        self.slack = slack
        # Sorted by id so every query is independent of input order.
        self.lane_ids = np.array(sorted(by_id), dtype=np.int64)
        starts, ends, owner = [], [], []
        for k, lid in enumerate(self.lane_ids):
            pts = by_id[int(lid)].centerline
            starts.append(pts[:-1])
            ends.append(pts[1:])
            owner.append(np.full(len(pts) - 1, k))
        if by_id:
            self._a = np.concatenate(starts)
            self._ab = np.concatenate(ends) - self._a
            self._ab2 = np.einsum("ij,ij->i", self._ab, self._ab)
            self._owner = np.concatenate(owner)
            self._seg_offsets = np.r_[0, np.cumsum([len(by_id[int(l)].centerline) - 1
                                                    for l in self.lane_ids])[:-1]]
            self._accept = np.array([by_id[int(l)].width / 2.0 + slack for l in self.lane_ids])

    def __len__(self) -> int:
        return len(self.lanes)

    def __iter__(self):
        return (self.lanes[int(l)] for l in self.lane_ids)

    def lane_distances(self, points: np.ndarray) -> np.ndarray:
        """Distance from each point to each lane polyline, shape (m, n_lanes)."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        ap = pts[:, None, :] - self._a[None, :, :]
        u = np.clip(np.einsum("msk,sk->ms", ap, self._ab) / self._ab2, 0.0, 1.0)
        diff = ap - u[..., None] * self._ab[None, :, :]
        seg_d = np.hypot(diff[..., 0], diff[..., 1])
        return np.minimum.reduceat(seg_d, self._seg_offsets, axis=1)


def map_points_to_lanes(graph: LaneGraph, points: np.ndarray) -> list[Optional[int]]:
    """Vectorised g(.): lane id for each point, or None when off every lane."""
    if len(graph) == 0:
        raise InvalidInputError("lane graph is empty")
    dist = graph.lane_distances(points)
    best = dist.min(axis=1)
    # lane_ids are sorted, so the first index within the tie band is the smallest id
    k = np.argmax(dist <= best[:, None] + TIE_TOL, axis=1)
    accepted = dist[np.arange(len(dist)), k] <= graph._accept[k]
    ids = graph.lane_ids[k]
    return [int(i) if ok else None for i, ok in zip(ids, accepted)]


def map_point_to_lane(graph: LaneGraph, p: Vec2) -> Optional[int]:
    return map_points_to_lanes(graph, np.array([[p.x, p.y]]))[0]


def future_lane_from_sequence(lanes: Sequence[Optional[int]]) -> LaneAssignment:
    """Current lane is the first entry; future lane the next distinct mapped lane.

    None entries are gaps and skipped.  An off-road first point gets the first
    mapped lane as its future lane.  Without any change the future lane equals
    the current lane.
    """
    if not lanes:
        raise InvalidInputError("empty lane sequence")
    current = lanes[0]
    for lane in lanes[1:]:
        if lane is not None and lane != current:
            return LaneAssignment(current, lane)
    return LaneAssignment(current, current)


def extract_future_lane(graph: LaneGraph, trajectory: Sequence[Vec2] | np.ndarray) -> LaneAssignment:
    pts = _as_points(trajectory)
    if len(pts) == 0:
        raise InvalidInputError("trajectory must be non-empty")
    return future_lane_from_sequence(map_points_to_lanes(graph, pts))


def ca_rollout(state: AgentState, steps: int, dt: float) -> np.ndarray:
    """Positions at k*dt for k = 0..steps under constant acceleration, shape (steps+1, 2)."""
    t = np.arange(steps + 1) * dt
    p = np.array(state.position.as_tuple())
    v = np.array(state.velocity.as_tuple())
    a = np.array(state.acceleration.as_tuple())
    return p + t[:, None] * v + 0.5 * (t * t)[:, None] * a


def lanes_from_rollout(graph: LaneGraph, rollouts: np.ndarray) -> list[LaneAssignment]:
    """Map a batch of predicted trajectories (b, steps, 2) to lane assignments in one pass."""
    rollouts = np.asarray(rollouts, dtype=float)
    b, n, _ = rollouts.shape
    flat = map_points_to_lanes(graph, rollouts.reshape(-1, 2))
    return [future_lane_from_sequence(flat[i * n:(i + 1) * n]) for i in range(b)]


def predict_lanes(graph: LaneGraph, history: Sequence[AgentState], rollout_horizon: int,
                  dt: float) -> list[LaneAssignment]:
    """Per-step current/future lanes from a CA rollout of each observed state."""
    if not history:
        raise InvalidInputError("history must be non-empty")
    if dt <= 0:
        raise InvalidInputError(f"dt must be positive, got {dt}")
    rollouts = np.stack([ca_rollout(s, rollout_horizon, dt) for s in history])
    return lanes_from_rollout(graph, rollouts)


def lane_accuracy(predicted: Sequence[LaneAssignment], truth: Sequence[LaneAssignment]) -> float:
    """Fraction of agents whose predicted future lane matches the ground truth one."""
    if len(predicted) != len(truth):
        raise InvalidInputError("predicted and truth lengths differ")
    if not truth:
        raise InvalidInputError("no samples")
    hits = sum(p.future_lane == t.future_lane for p, t in zip(predicted, truth))
    return hits / len(truth)


def _as_points(trajectory) -> np.ndarray:
    if isinstance(trajectory, np.ndarray):
        return trajectory.reshape(-1, 2).astype(float)
    return np.array([[p.x, p.y] for p in trajectory], dtype=float).reshape(-1, 2)


def load_lane_graph(path: str | Path, slack: float = DEFAULT_SLACK) -> LaneGraph:
    with open(path) as fh:
        doc = json.load(fh)
    return lane_graph_from_json(doc, slack)


def lane_graph_from_json(doc, slack: float = DEFAULT_SLACK) -> LaneGraph:
    if not isinstance(doc, list):
        raise SchemaError("lane graph JSON must be a top-level array")
    lanes = []
    for i, item in enumerate(doc):
        try:
            lanes.append(Lane(int(item["lane_id"]), np.array(item["centerline"], dtype=float),
                              float(item["width"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"lane entry {i}: {exc}") from exc
    return LaneGraph(lanes, slack)


def lane_graph_to_json(graph: LaneGraph) -> list[dict]:
    return [{"lane_id": lane.lane_id, "width": lane.width,
             "centerline": lane.centerline.tolist()} for lane in graph]


def save_lane_graph(graph: LaneGraph, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(lane_graph_to_json(graph), fh, indent=1)
