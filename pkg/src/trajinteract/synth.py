"""Seeded synthetic traffic scenes and scripted fixtures."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .ingestion import DatasetConfig, Sample, TrackTable, window_scenes
from .lane_graph import Lane, LaneGraph
from .state import AgentState, Vec2

LAYOUTS = ("straight-multilane", "merge", "intersection-cross")
MOTIONS = ("cv", "ca", "lane-change")
LANE_WIDTH = 3.5
TARGET_ID = 0


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 0
    lane_layout: str = "straight-multilane"
    n_agents: int = 8
    density_radius: float = 30.0
    motion: str = "cv"
    dt: float = 0.1
    T_h: int = 10
    T_f: int = 30
    n_windows: int = 1
    threshold_D: float = 30.0

    def __post_init__(self):
        if self.n_agents < 1:
            raise InvalidInputError("n_agents must be >= 1")
        if self.lane_layout not in LAYOUTS:
            raise InvalidInputError(f"lane_layout must be one of {LAYOUTS}")
        if self.motion not in MOTIONS:
            raise InvalidInputError(f"motion must be one of {MOTIONS}")
        if self.n_windows < 1 or self.density_radius <= 0:
            raise InvalidInputError("n_windows must be >= 1 and density_radius > 0")

    @property
    def dataset_config(self) -> DatasetConfig:
        return DatasetConfig(self.dt, 1, self.T_h, self.T_f, self.threshold_D)


@dataclass
class SynthResult:
    tracks: TrackTable
    lane_graph: LaneGraph
    config: DatasetConfig
    target_id: int
    samples: list[Sample]


def _straight(x0: float, x1: float, y: float, lane_id: int) -> Lane:
    return Lane(lane_id, np.array([[x0, y], [0.5 * (x0 + x1), y], [x1, y]]), LANE_WIDTH)


def build_layout(layout: str) -> tuple[LaneGraph, dict[int, tuple[float, float]]]:
    """Lane graph plus each lane's unit driving direction."""
    if layout == "straight-multilane":
        lanes = [_straight(-1000, 1000, LANE_WIDTH * i, i + 1) for i in range(3)]
        dirs = {1: (1.0, 0.0), 2: (1.0, 0.0), 3: (1.0, 0.0)}
    elif layout == "merge":
        # acceleration lane 3 runs alongside lane 1 and ends at x = 150
        lanes = [_straight(-1000, 1000, 0.0, 1), _straight(-1000, 1000, LANE_WIDTH, 2),
                 _straight(-1000, 150, -LANE_WIDTH, 3)]
        dirs = {1: (1.0, 0.0), 2: (1.0, 0.0), 3: (1.0, 0.0)}
    else:
        h = LANE_WIDTH / 2.0
        lanes = [
            Lane(1, np.array([[-1000.0, -h], [1000.0, -h]]), LANE_WIDTH),
            Lane(2, np.array([[1000.0, h], [-1000.0, h]]), LANE_WIDTH),
            Lane(3, np.array([[h, -1000.0], [h, 1000.0]]), LANE_WIDTH),
            Lane(4, np.array([[-h, 1000.0], [-h, -1000.0]]), LANE_WIDTH),
        ]
        dirs = {1: (1.0, 0.0), 2: (-1.0, 0.0), 3: (0.0, 1.0), 4: (0.0, -1.0)}
    return LaneGraph(lanes), dirs


def _lane_offset(graph: LaneGraph, lane_id: int) -> np.ndarray:
    return graph.lanes[lane_id].centerline[0]


def synthesize(spec: SynthSpec) -> SynthResult:
    """Generate tracks for ``spec`` and window them around agent 0.

    Motion is integrated with the same stepwise recursion the kinematic
    baselines use, so cv/ca futures are reproduced exactly by the matching model.
    """
    rng = np.random.default_rng(spec.seed)
    graph, dirs = build_layout(spec.lane_layout)
    n_frames = spec.T_h + spec.T_f + spec.n_windows - 1
    lane_ids = sorted(dirs)

    agents = []  # (start position, velocity, acceleration)
    start_lane = 1
    speed0 = rng.uniform(8.0, 14.0)
    agents.append(_spawn(rng, graph, dirs, spec, start_lane, 0.0, speed0, is_target=True))
    for i in range(1, spec.n_agents):
        if spec.lane_layout == "merge" and i == 1:
            lane, along = 3, rng.uniform(5.0, 0.6 * spec.density_radius)
        else:
            lane = int(rng.choice(lane_ids))
            lateral = _lateral_gap(graph, dirs, start_lane, lane)
            reach = math.sqrt(max(spec.density_radius ** 2 - lateral ** 2, 1.0))
            along = rng.uniform(-reach, reach) * 0.95
        agents.append(_spawn(rng, graph, dirs, spec, lane, along,
                             speed0 + rng.uniform(-3.0, 3.0), is_target=False))

    tracks = TrackTable()
    for agent_id, (p, v, a) in enumerate(agents):
        px, py = p
        vx, vy = v
        ax, ay = a
        heading = math.atan2(vy, vx)
        for frame in range(n_frames):
            if vx != 0.0 or vy != 0.0:
                heading = math.atan2(vy, vx)
            tracks.add(frame, AgentState(agent_id, Vec2(px, py), heading,
                                         Vec2(vx, vy), Vec2(ax, ay)))
            px += vx * spec.dt + ax * (0.5 * spec.dt * spec.dt)
            py += vy * spec.dt + ay * (0.5 * spec.dt * spec.dt)
            vx += ax * spec.dt
            vy += ay * spec.dt
    cfg = spec.dataset_config
    return SynthResult(tracks, graph, cfg, TARGET_ID, window_scenes(tracks, cfg, TARGET_ID, graph))


def _lateral_gap(graph, dirs, lane_a: int, lane_b: int) -> float:
    da = np.array(dirs[lane_a])
    normal = np.array([-da[1], da[0]])
    return abs(float(normal @ (_lane_offset(graph, lane_b) - _lane_offset(graph, lane_a))))


def _spawn(rng, graph, dirs, spec: SynthSpec, lane: int, along: float, speed: float,
           is_target: bool):
    d = np.array(dirs[lane])
    normal = np.array([-d[1], d[0]])
    c0 = _lane_offset(graph, lane)
    # project the lane onto the target's crossing point so "along" is measured from there
    base = c0 + d * float(d @ (np.zeros(2) - c0))
    pos = base + d * along
    vel = d * speed
    acc = np.zeros(2)
    if spec.motion == "ca":
        acc = d * rng.uniform(-1.0, 1.0)
    # on-ramp agents always merge; otherwise only lane-change motion changes lanes
    on_ramp = spec.lane_layout == "merge" and lane == 3
    if on_ramp or (spec.motion == "lane-change" and (is_target or rng.random() < 0.3)):
        side = _change_side(graph, dirs, lane, normal, rng)
        if side != 0.0:
            vel = vel + normal * side * rng.uniform(0.8, 1.2)
    return tuple(pos.tolist()), tuple(vel.tolist()), tuple(acc.tolist())


def _change_side(graph, dirs, lane: int, normal: np.ndarray, rng) -> float:
    """+1/-1 toward a parallel neighbouring lane, 0 when there is none."""
    here = _lane_offset(graph, lane)
    sides = []
    for other in dirs:
        if other == lane or dirs[other] != dirs[lane]:
            continue
        gap = float(normal @ (_lane_offset(graph, other) - here))
        if abs(abs(gap) - LANE_WIDTH) < 1e-6:
            sides.append(math.copysign(1.0, gap))
    if not sides:
        return 0.0
    return float(sides[int(rng.integers(len(sides)))])


def overtake_scenario(dt: float = 0.5, T_h: int = 10, T_f: int = 6,
                      threshold_D: float = 30.0) -> SynthResult:
    """Scripted overtake: target A (id 0) merges from lane 2 into lane 1 and passes B (id 1).

    In early frames B leads in A's future lane; by the last observed frame A is
    ahead of B in the same lane, so B no longer qualifies.
    """
    graph = LaneGraph([_straight(-1000, 1000, 0.0, 1), _straight(-1000, 1000, LANE_WIDTH, 2)])
    tracks = TrackTable()
    merge_end = LANE_WIDTH  # seconds needed at 1 m/s lateral
    for frame in range(T_h + T_f):
        t = frame * dt
        lateral_v = -1.0 if t < merge_end else 0.0
        a_y = LANE_WIDTH - min(t, merge_end) * 1.0
        a = AgentState(0, Vec2(16.0 * t, a_y), math.atan2(lateral_v, 16.0),
                       Vec2(16.0, lateral_v), Vec2(0.0, 0.0))
        b = AgentState(1, Vec2(20.0 + 10.0 * t, 0.0), 0.0, Vec2(10.0, 0.0), Vec2(0.0, 0.0))
        tracks.add(frame, a)
        tracks.add(frame, b)
    cfg = DatasetConfig(dt, 1, T_h, T_f, threshold_D)
    return SynthResult(tracks, graph, cfg, 0, window_scenes(tracks, cfg, 0, graph))

