"""Small constructors shared by the test modules."""

from __future__ import annotations

import numpy as np

from trajinteract.geometry import CaState
from trajinteract.lane_graph import Lane, LaneGraph
from trajinteract.state import AgentState, LaneAssignment, Vec2


def ca(p=(0.0, 0.0), v=(0.0, 0.0), a=(0.0, 0.0)) -> CaState:
    return CaState(Vec2(*p), Vec2(*v), Vec2(*a))


def agent(aid, p, v=(0.0, 0.0), a=(0.0, 0.0), heading=None, lanes=(None, None)) -> AgentState:
    if heading is None:
        heading = float(np.arctan2(v[1], v[0])) if v != (0.0, 0.0) else 0.0
    return AgentState(aid, Vec2(*p), heading, Vec2(*v), Vec2(*a), LaneAssignment(*lanes))


def parallel_lanes(n=2, width=3.5, length=1000.0) -> LaneGraph:
    """Lanes 1..n along +x at y = 0, width, 2*width ..."""
    return LaneGraph([Lane(i + 1, np.array([[-length, i * width], [length, i * width]]), width)
                      for i in range(n)])
