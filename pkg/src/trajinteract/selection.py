"""Lane-topology interacting-agent selection and the 5 x T_h x 7 interaction tensor."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidInputError
from .geometry import Pose, to_relative_frame
from .lane_graph import LaneGraph, ca_rollout, lanes_from_rollout
from .state import STATE_DIM, AgentState

CATEGORIES = ("SL", "FL", "FF", "ML")


@dataclass(frozen=True)
class Frame:
    """All agent states at one timestep; ``states[0]`` is the target."""

    timestep: int
    states: tuple[AgentState, ...]

    def __post_init__(self):
        states = tuple(self.states)
        if not states:
            raise InvalidInputError(f"frame {self.timestep}: no target state")
        ids = [s.agent_id for s in states]
        if len(set(ids)) != len(ids):
            raise InvalidInputError(f"frame {self.timestep}: duplicate agent ids")
        object.__setattr__(self, "states", states)

    @property
    def target(self) -> AgentState:
        return self.states[0]

    def by_id(self) -> dict[int, AgentState]:
        return {s.agent_id: s for s in self.states}


@dataclass(frozen=True)
class SceneHistory:
    frames: tuple[Frame, ...]
    lane_graph: LaneGraph
    dt: float

    def __post_init__(self):
        frames = tuple(self.frames)
        if not frames:
            raise InvalidInputError("scene has no frames")
        steps = [f.timestep for f in frames]
        if steps != sorted(steps):
            raise InvalidInputError("frames must be ordered by timestep")
        tid = frames[0].target.agent_id
        if any(f.target.agent_id != tid for f in frames):
            raise InvalidInputError("target agent must head every frame")
        if not self.dt > 0:
            raise InvalidInputError("dt must be positive")
        object.__setattr__(self, "frames", frames)

    @property
    def target_id(self) -> int:
        return self.frames[0].target.agent_id

    @property
    def T_h(self) -> int:
        return len(self.frames)


@dataclass(frozen=True)
class NeighborSet:
    sl: Optional[int] = None
    fl: Optional[int] = None
    ff: Optional[int] = None
    ml: Optional[int] = None

    def as_tuple(self) -> tuple[Optional[int], ...]:
        return (self.sl, self.fl, self.ff, self.ml)

    def __len__(self) -> int:
        return sum(i is not None for i in self.as_tuple())


@dataclass
class InteractionTensor:
    """Target (slot 0) plus SL/FL/FF/ML slots over the observation window.

    ``ids`` holds the agent id occupying each category slot, -1 where masked.
    """

    slots: np.ndarray  # (5, T_h, 7)
    mask: np.ndarray  # (4, T_h) bool
    ids: np.ndarray = field(default=None)  # (4, T_h) int
    frame: Optional[Pose] = None

    def __post_init__(self):
        if self.ids is None:
            self.ids = np.where(self.mask, 0, -1)

    @property
    def T_h(self) -> int:
        return self.slots.shape[1]


def select_neighbors(frame: Frame, threshold_D: float) -> NeighborSet:
    """Interacting-agent selection over one frame (SL, FL, FF, ML), nearest per category.

    The four branches form an if/elif chain: an agent is offered to later
    categories only when it fails an earlier one (distance test included).
    Lane tests against an unknown (None) lane are false.
    """
    if not threshold_D > 0:
        raise InvalidInputError("threshold_D must be positive")
    target = frame.states[0]
    px, py = target.position.x, target.position.y
    v0x, v0y = target.velocity.x, target.velocity.y
    cur0 = target.lanes.current_lane
    fut0 = target.lanes.future_lane
    target_changes = cur0 is not None and fut0 is not None and fut0 != cur0

    d_sl = d_fl = d_ff = d_ml = threshold_D
    sl = fl = ff = ml = None
    for agent in frame.states[1:]:
        dx = agent.position.x - px
        dy = agent.position.y - py
        d = math.hypot(dx, dy)
        o_n0 = dx * v0x + dy * v0y
        o_0n = -dx * agent.velocity.x - dy * agent.velocity.y
        cur_n = agent.lanes.current_lane
        fut_n = agent.lanes.future_lane
        if d < d_sl and cur0 is not None and cur_n == cur0 and o_n0 >= 0:
            d_sl, sl = d, agent.agent_id
        elif d < d_fl and target_changes and cur_n == fut0 and o_n0 >= 0 and o_0n < 0:
            d_fl, fl = d, agent.agent_id
        elif (d < d_ff and target_changes and cur_n == fut0
              and ((o_n0 >= 0 and o_0n >= 0) or o_n0 < 0)):
            d_ff, ff = d, agent.agent_id
        elif (d < d_ml and cur0 is not None and fut_n == cur0 and o_n0 >= 0
              and cur_n is not None and fut_n != cur_n):
            d_ml, ml = d, agent.agent_id
    return NeighborSet(sl, fl, ff, ml)


def assign_lanes(scene: SceneHistory, rollout_horizon: int) -> SceneHistory:
    """Fill every state's current/future lane from a CA rollout of ``rollout_horizon`` steps."""
    states = [s for f in scene.frames for s in f.states]
    rollouts = np.stack([ca_rollout(s, rollout_horizon, scene.dt) for s in states])
    lanes = iter(lanes_from_rollout(scene.lane_graph, rollouts))
    frames = tuple(
        replace(f, states=tuple(s.with_lanes(next(lanes)) for s in f.states))
        for f in scene.frames
    )
    return replace(scene, frames=frames)


def build_interaction_tensor(scene: SceneHistory, threshold_D: float,
                             per_timestep: bool = True, relative: bool = True
                             ) -> InteractionTensor:
    """Assemble the interaction tensor.

    ``per_timestep`` selects neighbours independently at every frame; otherwise
    selection runs at the last frame only and the chosen agents' histories fill
    their slots.  With ``relative`` all states are expressed in the frame of the
    target's last observed pose.
    """
    if per_timestep:
        chosen = [select_neighbors(f, threshold_D).as_tuple() for f in scene.frames]
    else:
        chosen = [select_neighbors(scene.frames[-1], threshold_D).as_tuple()] * scene.T_h

    return assemble_slots(scene, chosen, relative)


def assemble_slots(scene: SceneHistory, picked: Sequence[tuple], relative: bool = True
                   ) -> InteractionTensor:
    """Fill the 4 category slots from per-step neighbour ids (None = empty)."""
    pose = Pose.of(scene.frames[-1].target)
    T_h = scene.T_h
    slots = np.zeros((5, T_h, STATE_DIM))
    mask = np.zeros((4, T_h), dtype=bool)
    ids = np.full((4, T_h), -1, dtype=np.int64)
    for t, (frame, row) in enumerate(zip(scene.frames, picked)):
        lookup = frame.by_id() if any(i is not None for i in row) else {}
        slots[0, t] = state_row(frame.target, pose, relative)
        for s, agent_id in enumerate(row):
            state = lookup.get(agent_id) if agent_id is not None else None
            if state is None:
                continue
            slots[s + 1, t] = state_row(state, pose, relative)
            mask[s, t] = True
            ids[s, t] = agent_id
    return InteractionTensor(slots, mask, ids, pose if relative else None)


def state_row(state: AgentState, pose: Pose, relative: bool = True) -> list[float]:
    """7-feature row of ``state``, optionally in the frame of ``pose``."""
    return (to_relative_frame(state, pose) if relative else state).as_array()


def neighbor_sets(scene: SceneHistory, threshold_D: float,
                  per_timestep: bool = True) -> list[NeighborSet]:
    """NeighborSet per frame; in current mode the last frame's set is repeated."""
    if per_timestep:
        return [select_neighbors(f, threshold_D) for f in scene.frames]
    return [select_neighbors(scene.frames[-1], threshold_D)] * scene.T_h


def target_history(scene: SceneHistory) -> Sequence[AgentState]:
    return [f.target for f in scene.frames]
