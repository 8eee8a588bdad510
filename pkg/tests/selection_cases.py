"""Random frame generator for selection checks."""

from __future__ import annotations

import numpy as np

from builders import agent
from trajinteract.selection import Frame

LANE_CHOICES = (None, 1, 2, 3)


def random_frame(rng: np.random.Generator, max_agents: int = 30) -> Frame:
    n = int(rng.integers(1, max_agents + 1))
    states = []
    for i in range(n):
        cur = LANE_CHOICES[rng.integers(len(LANE_CHOICES))]
        fut = cur if rng.random() < 0.4 else LANE_CHOICES[rng.integers(len(LANE_CHOICES))]
        # coarse grid positions make distance ties and zero dot products common
        if rng.random() < 0.3:
            p = tuple(float(v) for v in rng.integers(-20, 21, size=2))
            v = tuple(float(v) for v in rng.integers(-2, 3, size=2))
        else:
            p = tuple(rng.uniform(-40, 40, size=2).tolist())
            v = tuple(rng.uniform(-15, 15, size=2).tolist())
        if i == 0:
            p = (0.0, 0.0)
        states.append(agent(100 + i, p, v, lanes=(cur, fut)))
    return Frame(0, tuple(states))
