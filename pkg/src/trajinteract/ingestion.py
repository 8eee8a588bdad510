"""Trajectory CSV ingestion, downsampling and sliding-window scene construction."""

from __future__ import annotations

import configparser
import csv
import io
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import NamedTuple, Optional, TextIO

import numpy as np

from .errors import InvalidInputError, SchemaError
from .geometry import DEFAULT_LIMITS, SanityLimits, check_sanity
from .lane_graph import LaneGraph
from .selection import Frame, SceneHistory
from .state import AgentState, Vec2

NATIVE_COLUMNS = ("frame", "id", "x", "y", "vx", "vy", "ax", "ay")
# highD tracks files: x/y is the bounding-box corner, recentred with width/height.
HIGHD_COLUMNS = ("frame", "id", "x", "y", "width", "height",
                 "xVelocity", "yVelocity", "xAcceleration", "yAcceleration")


@dataclass(frozen=True)
class DatasetConfig:
    dt_raw: float = 0.1
    downsample_factor: int = 1
    T_h: int = 10
    T_f: int = 30
    threshold_D: float = 30.0

    def __post_init__(self):
        if self.downsample_factor < 1 or self.T_h < 1 or self.T_f < 1:
            raise InvalidInputError("downsample_factor, T_h and T_f must be >= 1")
        if not (self.dt_raw > 0 and self.threshold_D > 0):
            raise InvalidInputError("dt_raw and threshold_D must be positive")

    @property
    def dt(self) -> float:
        return self.dt_raw * self.downsample_factor


# 10 Hz, 1 s -> 3 s; 25 Hz raw downsampled to 5 Hz, 3 s -> 5 s; 30 Hz, 2 s -> 6 s.
PRESETS = {
    "interaction": DatasetConfig(0.1, 1, 10, 30, 30.0),
    "highd": DatasetConfig(0.04, 5, 15, 25, 200.0),
    "citysim": DatasetConfig(1.0 / 30.0, 1, 60, 180, 45.0),
}


def load_config(path: str | Path, base: DatasetConfig = DatasetConfig()) -> DatasetConfig:
    """Read a ``[dataset]`` INI section; ``preset = highd`` picks a preset as the base."""
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise InvalidInputError(f"cannot read config {path}")
    if not parser.has_section("dataset"):
        raise SchemaError(f"{path}: missing [dataset] section")
    sec = parser["dataset"]
    if "preset" in sec:
        try:
            base = PRESETS[sec["preset"].strip().lower()]
        except KeyError:
            raise SchemaError(f"unknown preset {sec['preset']!r}") from None
    values = {}
    for f in fields(DatasetConfig):
        if f.name in sec:
            cast = int if f.type in ("int", int) else float
            try:
                values[f.name] = cast(sec[f.name])
            except ValueError:
                raise SchemaError(f"{path}: bad value for {f.name}: {sec[f.name]!r}") from None
    return DatasetConfig(**{**base.__dict__, **values})


@dataclass
class TrackTable:
    """Validated agent states keyed by frame then agent id."""

    frames: dict[int, dict[int, AgentState]] = field(default_factory=dict)
    lane_ids: dict[tuple[int, int], int] = field(default_factory=dict)
    rejected: list[str] = field(default_factory=list)

    def add(self, frame: int, state: AgentState, lane_id: Optional[int] = None) -> None:
        bucket = self.frames.setdefault(frame, {})
        if state.agent_id in bucket:
            raise SchemaError(f"duplicate (frame, id) = ({frame}, {state.agent_id})")
        bucket[state.agent_id] = state
        if lane_id is not None:
            self.lane_ids[(frame, state.agent_id)] = lane_id

    def __len__(self) -> int:
        return sum(len(b) for b in self.frames.values())

    def agent_ids(self) -> list[int]:
        return sorted({i for b in self.frames.values() for i in b})

    def track_frames(self, agent_id: int) -> list[int]:
        return sorted(f for f, b in self.frames.items() if agent_id in b)


class Sample(NamedTuple):
    scene: SceneHistory
    future: np.ndarray  # (T_f, 2) target positions


def _number(value: str, row: int, col: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise SchemaError(f"row {row}, column {col!r}: non-numeric value {value!r}") from None


def _integer(value: str, row: int, col: str) -> int:
    x = _number(value, row, col)
    if not x.is_integer():
        raise SchemaError(f"row {row}, column {col!r}: expected an integer, got {value!r}")
    return int(x)


def load_trajectories(path: str | Path | TextIO, schema: str = "native",
                      limits: SanityLimits = DEFAULT_LIMITS) -> TrackTable:
    """Parse a trajectory CSV into a :class:`TrackTable`.

    Schema violations raise :class:`SchemaError`; rows with non-finite values or
    beyond the sanity limits are dropped and reported in ``table.rejected``.
    """
    if schema not in ("native", "highd"):
        raise InvalidInputError(f"unknown schema {schema!r}")
    if isinstance(path, (str, Path)):
        with open(path, newline="") as fh:
            return _parse(fh, schema, limits)
    return _parse(path, schema, limits)


def _parse(fh: TextIO, schema: str, limits: SanityLimits) -> TrackTable:
    reader = csv.DictReader(fh)
    header = [h.strip() for h in (reader.fieldnames or [])]
    if not header:
        raise SchemaError("missing header row")
    reader.fieldnames = header
    required = NATIVE_COLUMNS if schema == "native" else HIGHD_COLUMNS
    for col in required:
        if col not in header:
            raise SchemaError(f"missing required column {col!r}")
    lane_col = "lane_id" if schema == "native" else "laneId"
    has_heading = schema == "native" and "heading" in header

    table = TrackTable()
    pending: dict[int, list[tuple[int, int, dict, Optional[int]]]] = {}
    seen: set[tuple[int, int]] = set()
    for rowno, raw in enumerate(reader, start=2):
        frame = _integer(raw["frame"], rowno, "frame")
        agent = _integer(raw["id"], rowno, "id")
        if (frame, agent) in seen:
            raise SchemaError(f"row {rowno}: duplicate (frame, id) = ({frame}, {agent})")
        seen.add((frame, agent))
        if schema == "native":
            vals = {c: _number(raw[c], rowno, c) for c in NATIVE_COLUMNS[2:]}
        else:
            w = _number(raw["width"], rowno, "width")
            h = _number(raw["height"], rowno, "height")
            vals = {
                "x": _number(raw["x"], rowno, "x") + w / 2.0,
                "y": _number(raw["y"], rowno, "y") + h / 2.0,
                "vx": _number(raw["xVelocity"], rowno, "xVelocity"),
                "vy": _number(raw["yVelocity"], rowno, "yVelocity"),
                "ax": _number(raw["xAcceleration"], rowno, "xAcceleration"),
                "ay": _number(raw["yAcceleration"], rowno, "yAcceleration"),
            }
        if has_heading:
            vals["heading"] = _number(raw["heading"], rowno, "heading")
        lane = None
        if raw.get(lane_col) not in (None, ""):
            lane = _integer(raw[lane_col], rowno, lane_col)

        bad = [k for k, v in vals.items() if not math.isfinite(v)]
        if bad:
            table.rejected.append(f"row {rowno}: non-finite {', '.join(bad)}")
            continue
        try:
            check_sanity(Vec2(vals["vx"], vals["vy"]), Vec2(vals["ax"], vals["ay"]), limits)
        except InvalidInputError as exc:
            table.rejected.append(f"row {rowno}: {exc}")
            continue
        pending.setdefault(agent, []).append((frame, rowno, vals, lane))

    for agent, rows in pending.items():
        rows.sort(key=lambda r: r[0])
        heading = 0.0
        for frame, _, vals, lane in rows:
            if "heading" in vals:
                heading = vals["heading"]
            elif vals["vx"] != 0.0 or vals["vy"] != 0.0:
                heading = math.atan2(vals["vy"], vals["vx"])
            state = AgentState(agent, Vec2(vals["x"], vals["y"]), heading,
                               Vec2(vals["vx"], vals["vy"]), Vec2(vals["ax"], vals["ay"]))
            table.add(frame, state, lane)
    table.frames = dict(sorted(table.frames.items()))
    for frame in table.frames:
        table.frames[frame] = dict(sorted(table.frames[frame].items()))
    return table


def write_trajectories(table: TrackTable, out: str | Path | TextIO) -> None:
    """Write the native CSV schema; floats use shortest round-trip repr."""
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="") as fh:
            write_trajectories(table, fh)
        return
    with_lanes = bool(table.lane_ids)
    cols = ["frame", "id", "x", "y", "heading", "vx", "vy", "ax", "ay"]
    if with_lanes:
        cols.append("lane_id")
    out.write(",".join(cols) + "\n")
    for frame in sorted(table.frames):
        for agent in sorted(table.frames[frame]):
            s = table.frames[frame][agent]
            vals = [str(frame), str(agent)] + [repr(float(v)) for v in s.as_array()]
            if with_lanes:
                lane = table.lane_ids.get((frame, agent))
                vals.append("" if lane is None else str(lane))
            out.write(",".join(vals) + "\n")


def trajectories_to_csv(table: TrackTable) -> str:
    buf = io.StringIO()
    write_trajectories(table, buf)
    return buf.getvalue()


def window_scenes(tracks: TrackTable, cfg: DatasetConfig, target_id: int,
                  lane_graph: LaneGraph) -> list[Sample]:
    """Sliding windows of T_h + T_f downsampled steps where the target is always present.

    The downsampling grid is anchored at the target's first frame and keeps
    every ``downsample_factor``-th raw frame; no interpolation.
    """
    own = tracks.track_frames(target_id)
    if not own:
        return []
    k = cfg.downsample_factor
    grid = list(range(own[0], own[-1] + 1, k))
    present = set(own)
    span = cfg.T_h + cfg.T_f
    samples = []
    for start in range(len(grid) - span + 1):
        window = grid[start:start + span]
        if any(f not in present for f in window):
            continue
        frames = []
        for i, f in enumerate(window[:cfg.T_h]):
            bucket = tracks.frames[f]
            others = tuple(s for aid, s in bucket.items() if aid != target_id)
            frames.append(Frame(i - cfg.T_h + 1, (bucket[target_id],) + others))
        future = np.array([tracks.frames[f][target_id].position.as_tuple()
                           for f in window[cfg.T_h:]])
        samples.append(Sample(SceneHistory(tuple(frames), lane_graph, cfg.dt), future))
    return samples
