"""Core data types: planar vectors, lane assignments and per-agent states."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .errors import InvalidInputError

# Order of the 7 state features in every array representation.
STATE_FIELDS = ("x", "y", "heading", "vx", "vy", "ax", "ay")
STATE_DIM = len(STATE_FIELDS)


def wrap_angle(angle: float) -> float:
    """Wrap an angle in radians into (-pi, pi]."""
    w = math.remainder(angle, 2.0 * math.pi)
    if w <= -math.pi:
        w += 2.0 * math.pi
    return w


@dataclass(frozen=True, slots=True)
class Vec2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidInputError(f"non-finite vector component: ({self.x}, {self.y})")

    def __add__(self, other: Vec2) -> Vec2:
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: Vec2) -> Vec2:
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, k: float) -> Vec2:
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def __neg__(self) -> Vec2:
        return Vec2(-self.x, -self.y)

    def dot(self, other: Vec2) -> float:
        return self.x * other.x + self.y * other.y

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def norm2(self) -> float:
        return self.x * self.x + self.y * self.y

    def rotated(self, angle: float) -> Vec2:
        c, s = math.cos(angle), math.sin(angle)
        return Vec2(c * self.x - s * self.y, s * self.x + c * self.y)

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


ZERO = Vec2(0.0, 0.0)


@dataclass(frozen=True, slots=True)
class LaneAssignment:
    """Current lane and next distinct lane of an agent; ``None`` means off-road/unknown."""

    current_lane: Optional[int] = None
    future_lane: Optional[int] = None


@dataclass(frozen=True, slots=True)
class AgentState:
    """One agent's 7-dim kinematic state at one timestep, plus identity and lanes."""

    agent_id: int
    position: Vec2
    heading: float = 0.0
    velocity: Vec2 = ZERO
    acceleration: Vec2 = ZERO
    lanes: LaneAssignment = field(default_factory=LaneAssignment)

    def __post_init__(self):
        if not math.isfinite(self.heading):
            raise InvalidInputError(f"agent {self.agent_id}: non-finite heading")
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    def as_array(self) -> list[float]:
        return [
            self.position.x, self.position.y, self.heading,
            self.velocity.x, self.velocity.y,
            self.acceleration.x, self.acceleration.y,
        ]

    @classmethod
    def from_array(cls, agent_id: int, values: Sequence[float],
                   lanes: Optional[LaneAssignment] = None) -> AgentState:
        x, y, h, vx, vy, ax, ay = (float(v) for v in values)
        return cls(agent_id, Vec2(x, y), h, Vec2(vx, vy), Vec2(ax, ay),
                   lanes if lanes is not None else LaneAssignment())

    def with_lanes(self, lanes: LaneAssignment) -> AgentState:
        return replace(self, lanes=lanes)
