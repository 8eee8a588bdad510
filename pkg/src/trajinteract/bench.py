"""Latency harness split into lane prediction (LP), agent selection (AS) and trajectory prediction (TP).

Strategies:
  alg1        lane-topology selection at every observed step, physical attention
  radius-all  every agent within D at the last step, learned dot-product attention
  k-nearest   the 4 nearest agents within D at the last step, learned attention
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .attention import CoefficientConfig, attention_matrix
from .encoder import EncoderWeights, encode_interactions, layer_norm
from .evaluation import predict_cv
from .geometry import Pose
from .ingestion import Sample
from .selection import (SceneHistory, assemble_slots, assign_lanes, build_interaction_tensor,
                        neighbor_sets, state_row, target_history)
from .state import STATE_DIM
from .synth import SynthSpec, synthesize

STRATEGIES = ("alg1", "radius-all", "k-nearest")
STAGES = ("LP", "AS", "TP")


def select_radius_all(scene: SceneHistory, threshold_D: float) -> list[int]:
    """Ids of every non-target agent strictly within D of the target at the last step."""
    frame = scene.frames[-1]
    p0 = frame.target.position
    return [s.agent_id for s in frame.states[1:]
            if math.hypot(s.position.x - p0.x, s.position.y - p0.y) < threshold_D]


def select_k_nearest(scene: SceneHistory, threshold_D: float, k: int = 4) -> list[int]:
    frame = scene.frames[-1]
    p0 = frame.target.position
    dists = []
    for s in frame.states[1:]:
        d = math.hypot(s.position.x - p0.x, s.position.y - p0.y)
        if d < threshold_D:
            dists.append((d, s.agent_id))
    return [aid for _, aid in sorted(dists)[:k]]


def assemble_histories(scene: SceneHistory, ids: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Target plus the given agents' full histories in the target's last-pose frame.

    Returns states (1 + len(ids), T_h, 7) and a presence mask (len(ids), T_h).
    """
    pose = Pose.of(scene.frames[-1].target)
    T_h = scene.T_h
    out = np.zeros((1 + len(ids), T_h, STATE_DIM))
    mask = np.zeros((len(ids), T_h), dtype=bool)
    for t, frame in enumerate(scene.frames):
        out[0, t] = state_row(frame.target, pose, True)
        lookup = frame.by_id()
        for j, aid in enumerate(ids):
            state = lookup.get(aid)
            if state is not None:
                out[j + 1, t] = state_row(state, pose, True)
                mask[j, t] = True
    return out, mask


def learned_attention_encode(states: np.ndarray, mask: np.ndarray, w: EncoderWeights) -> np.ndarray:
    """Dot-product attention of the target embedding over neighbour embeddings, then the FFN block."""
    z = w.fc_embed(states)  # (1 + n, T_h, e)
    q = z[0]
    if len(z) > 1:
        logits = np.einsum("te,nte->nt", q, z[1:]) / math.sqrt(z.shape[-1])
        logits = np.where(mask, logits, -np.inf)
        top = np.max(logits, axis=0, keepdims=True)
        top = np.where(np.isfinite(top), top, 0.0)
        ex = np.where(mask, np.exp(logits - top), 0.0)
        denom = ex.sum(axis=0, keepdims=True)
        weights = np.divide(ex, denom, out=np.zeros_like(ex), where=denom > 0)
        agg = q + np.einsum("nt,nte->te", weights, z[1:])
    else:
        agg = q
    h0 = w.fc_merge(agg)
    h = layer_norm(h0, w.ln_pre.scale, w.ln_pre.shift)
    h = w.ffn_out(np.maximum(w.ffn_in(h), 0.0))
    return layer_norm(h, w.ln_post.scale, w.ln_post.shift) + h0


@dataclass
class StageTimes:
    strategy: str
    samples: dict  # stage -> list of seconds; "total" included

    def summary(self) -> dict:
        row = {"strategy": self.strategy}
        for stage in STAGES + ("total",):
            vals = self.samples.get(stage)
            if not vals:
                row[f"{stage}_median_ms"] = None
                row[f"{stage}_p95_ms"] = None
                continue
            arr = np.asarray(vals) * 1e3
            row[f"{stage}_median_ms"] = float(np.median(arr))
            row[f"{stage}_p95_ms"] = float(np.percentile(arr, 95))
        return row


def _run_alg1(scene: SceneHistory, T_f: int, threshold_D: float, weights: EncoderWeights,
              cfg: CoefficientConfig) -> tuple[float, float, float]:
    t0 = time.perf_counter()
    scene = assign_lanes(scene, T_f)
    t1 = time.perf_counter()
    tensor = build_interaction_tensor(scene, threshold_D, per_timestep=True)
    t2 = time.perf_counter()
    encode_interactions(tensor, attention_matrix(tensor, cfg), weights)
    predict_cv(target_history(scene), T_f, scene.dt)
    t3 = time.perf_counter()
    return t1 - t0, t2 - t1, t3 - t2


def _run_baseline(scene: SceneHistory, chooser: Callable, T_f: int, threshold_D: float,
                  weights: EncoderWeights) -> tuple[None, float, float]:
    t1 = time.perf_counter()
    states, mask = assemble_histories(scene, chooser(scene, threshold_D))
    t2 = time.perf_counter()
    learned_attention_encode(states, mask, weights)
    predict_cv(target_history(scene), T_f, scene.dt)
    t3 = time.perf_counter()
    return None, t2 - t1, t3 - t2


def run_strategy(strategy: str, samples: Sequence[Sample], reps: int, T_f: int,
                 threshold_D: float, weights: EncoderWeights,
                 cfg: CoefficientConfig = CoefficientConfig()) -> StageTimes:
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    times: dict[str, list[float]] = {"LP": [], "AS": [], "TP": [], "total": []}
    for _ in range(reps):
        for sample in samples:
            if strategy == "alg1":
                lp, as_, tp = _run_alg1(sample.scene, T_f, threshold_D, weights, cfg)
                times["LP"].append(lp)
            else:
                chooser = select_radius_all if strategy == "radius-all" else select_k_nearest
                lp, as_, tp = _run_baseline(sample.scene, chooser, T_f, threshold_D, weights)
            times["AS"].append(as_)
            times["TP"].append(tp)
            times["total"].append((lp or 0.0) + as_ + tp)
    return StageTimes(strategy, times)


def time_slot_assembly(samples: Sequence[Sample], reps: int, T_f: int,
                       threshold_D: float) -> list[float]:
    """Wall time of filling the 4 category slots alone, selection precomputed."""
    prepared = []
    for sample in samples:
        scene = assign_lanes(sample.scene, T_f)
        picked = [ns.as_tuple() for ns in neighbor_sets(scene, threshold_D, True)]
        prepared.append((scene, picked))
    out = []
    for _ in range(reps):
        for scene, picked in prepared:
            t0 = time.perf_counter()
            assemble_slots(scene, picked)
            out.append(time.perf_counter() - t0)
    return out


@dataclass
class BenchReport:
    rows: list[dict]
    slot_assembly_median_ms: float
    guard_ratio: float  # alg1 AS median / (radius-all AS median + slot assembly median)
    n_scenes: int
    reps: int
    agents_in_radius: float

    def to_csv(self) -> str:
        cols = ["strategy"] + [f"{s}_{m}_ms" for s in STAGES + ("total",) for m in ("median", "p95")]
        lines = [",".join(cols)]
        for row in self.rows:
            lines.append(",".join("" if row[c] is None else (row[c] if c == "strategy"
                                                             else f"{row[c]:.4f}") for c in cols))
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {"stages": self.rows, "slot_assembly_median_ms": self.slot_assembly_median_ms,
                "guard_ratio": self.guard_ratio, "n_scenes": self.n_scenes, "reps": self.reps,
                "mean_agents_within_D": self.agents_in_radius}


def run_benchmark(seed: int = 0, density: int = 25, radius: float = 30.0, n_scenes: int = 5,
                  reps: int = 20, T_h: int = 10, T_f: int = 30, dt: float = 0.1,
                  layout: str = "straight-multilane",
                  strategies: Sequence[str] = STRATEGIES) -> BenchReport:
    """Time every strategy on the same seeded scenes with ``density`` agents around the target."""
    samples = []
    for i in range(n_scenes):
        # placed inside 0.85 R so relative drift over the history keeps everyone within D
        spec = SynthSpec(seed=seed + i, lane_layout=layout, n_agents=density + 1,
                         density_radius=0.85 * radius, motion="lane-change", dt=dt, T_h=T_h, T_f=T_f,
                         threshold_D=radius)
        samples.extend(synthesize(spec).samples[:1])
    weights = EncoderWeights.random(seed)
    # warm-up pass so one-time allocation costs stay out of the medians
    for strategy in strategies:
        run_strategy(strategy, samples[:1], 1, T_f, radius, weights)
    rows = [run_strategy(s, samples, reps, T_f, radius, weights).summary() for s in strategies]
    assembly = float(np.median(time_slot_assembly(samples, reps, T_f, radius)) * 1e3)
    by = {r["strategy"]: r for r in rows}
    ratio = float("nan")
    if "alg1" in by and "radius-all" in by:
        ratio = by["alg1"]["AS_median_ms"] / (by["radius-all"]["AS_median_ms"] + assembly)
    in_radius = float(np.mean([len(select_radius_all(s.scene, radius)) for s in samples]))
    return BenchReport(rows, assembly, ratio, len(samples), reps, in_radius)
