"""Command-line interface: select, attn, predict, eval, bench, synth.

Exit codes: 0 success, 1 input error, 2 internal invariant violation.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from typing import Optional, Sequence

import numpy as np

from . import bench as bench_mod
from .attention import CoefficientConfig, attention_matrix
from .errors import InvalidInputError, InvariantViolation, TrajInteractError
from .evaluation import (PredictionSet, loss_distance, loss_diversity, min_ade, min_fde,
                         predict_ca, predict_cv, rmse, rmse_by_horizon)
from .ingestion import PRESETS, DatasetConfig, Sample, load_config, load_trajectories, \
    trajectories_to_csv, window_scenes
from .lane_graph import lane_graph_to_json, load_lane_graph
from .selection import CATEGORIES, assign_lanes, build_interaction_tensor, target_history
from .synth import LAYOUTS, MOTIONS, SynthSpec, overtake_scenario, synthesize

log = logging.getLogger("trajinteract")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="INI file with a [dataset] section")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file (default: stdout)")
    return p


def _input_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    src = p.add_argument_group("input")
    src.add_argument("--tracks", help="trajectory CSV; synthetic scenes are used when omitted")
    src.add_argument("--lanes", help="lane-graph JSON (required with --tracks)")
    src.add_argument("--schema", choices=("native", "highd"), default="native")
    src.add_argument("--target", type=int, action="append",
                     help="target agent id (repeatable; default: every agent)")
    src.add_argument("--preset", choices=sorted(PRESETS))
    syn = p.add_argument_group("synthetic input")
    syn.add_argument("--scenario", choices=("synth", "overtake"), default="synth")
    syn.add_argument("--layout", choices=LAYOUTS, default="straight-multilane")
    syn.add_argument("--motion", choices=MOTIONS, default="cv")
    syn.add_argument("--n-agents", type=int, default=8)
    syn.add_argument("--radius", type=float, default=30.0)
    syn.add_argument("--windows", type=int, default=1)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trajinteract", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    g, i = _global_flags(), _input_flags()

    p = sub.add_parser("select", parents=[g, i], help="per-step interacting agents")
    p.add_argument("--mode", choices=("all", "current"), default="all")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("attn", parents=[g, i], help="physical attention matrix as CSV")
    p.add_argument("--mode", choices=("all", "current"), default="all")
    p.add_argument("--part", choices=("ab", "a", "b"), default="ab")
    p.add_argument("--window", type=int, default=0)
    p.add_argument("--horizon-T", type=float, default=30.0)
    p.add_argument("--epsilon", type=float, default=1.0)

    p = sub.add_parser("predict", parents=[g, i], help="kinematic baseline predictions")
    p.add_argument("--model", choices=("cv", "ca"), default="cv")

    p = sub.add_parser("eval", parents=[g, i], help="metrics report as JSON")
    p.add_argument("--model", choices=("cv", "ca"), default="cv")
    p.add_argument("--modes", type=int, default=1, help="duplicate the prediction K times")
    p.add_argument("--sigma", type=float, help="scalar sigma for the diversity loss")
    p.add_argument("--per-sample", help="CSV path for per-sample errors")

    p = sub.add_parser("bench", parents=[g], help="LP/AS/TP latency table")
    p.add_argument("--density", type=int, default=25, help="agents around the target")
    p.add_argument("--radius", type=float, default=30.0)
    p.add_argument("--scenes", type=int, default=5)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--strategies", nargs="+", choices=bench_mod.STRATEGIES,
                   default=list(bench_mod.STRATEGIES))
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("synth", parents=[g], help="write a synthetic trajectory CSV")
    p.add_argument("--layout", choices=LAYOUTS, default="straight-multilane")
    p.add_argument("--motion", choices=MOTIONS, default="cv")
    p.add_argument("--n-agents", type=int, default=8)
    p.add_argument("--radius", type=float, default=30.0)
    p.add_argument("--windows", type=int, default=1)
    p.add_argument("--lanes-out", help="also write the lane graph JSON here")
    return parser


def _dataset_config(args) -> Optional[DatasetConfig]:
    base = PRESETS[args.preset] if getattr(args, "preset", None) else DatasetConfig()
    if args.config:
        return load_config(args.config, base)
    return base if getattr(args, "preset", None) else None


def load_samples(args) -> tuple[list[Sample], DatasetConfig]:
    cfg = _dataset_config(args)
    if args.tracks:
        if not args.lanes:
            raise InvalidInputError("--lanes is required with --tracks")
        cfg = cfg or DatasetConfig()
        graph = load_lane_graph(args.lanes)
        table = load_trajectories(args.tracks, args.schema)
        for msg in table.rejected:
            log.warning("rejected %s", msg)
        targets = args.target or table.agent_ids()
        samples = [s for tid in targets for s in window_scenes(table, cfg, tid, graph)]
        return samples, cfg
    if args.scenario == "overtake":
        result = overtake_scenario()
    else:
        spec_kwargs = {}
        if cfg is not None:
            spec_kwargs = dict(dt=cfg.dt, T_h=cfg.T_h, T_f=cfg.T_f, threshold_D=cfg.threshold_D)
        result = synthesize(SynthSpec(seed=args.seed, lane_layout=args.layout,
                                      n_agents=args.n_agents, density_radius=args.radius,
                                      motion=args.motion, n_windows=args.windows, **spec_kwargs))
    return result.samples, result.config


@contextlib.contextmanager
def _output(path: Optional[str]):
    if path:
        with open(path, "w", newline="") as fh:
            yield fh
    else:
        yield sys.stdout


def cmd_select(args) -> None:
    samples, cfg = load_samples(args)
    records = []
    for w, sample in enumerate(samples):
        scene = assign_lanes(sample.scene, cfg.T_f)
        tensor = build_interaction_tensor(scene, cfg.threshold_D, args.mode == "all")
        if tensor.mask.sum(axis=0).max(initial=0) > 4:
            raise InvariantViolation("more than four populated slots")
        for t in range(scene.T_h):
            ids = [int(i) if i >= 0 else None for i in tensor.ids[:, t]]
            records.append({"window": w, "target": scene.target_id,
                            "t": scene.frames[t].timestep,
                            **{c.lower(): i for c, i in zip(CATEGORIES, ids)}})
    with _output(args.out) as fh:
        if args.format == "json":
            json.dump(records, fh, indent=1)
            fh.write("\n")
            return
        cols = ["window", "target", "t", "sl", "fl", "ff", "ml"]
        fh.write(",".join(cols) + "\n")
        for r in records:
            fh.write(",".join("" if r[c] is None else str(r[c]) for c in cols) + "\n")


def cmd_attn(args) -> None:
    samples, cfg = load_samples(args)
    if not samples:
        raise InvalidInputError("no complete window in the input")
    if not 0 <= args.window < len(samples):
        raise InvalidInputError(f"--window must be in [0, {len(samples) - 1}]")
    scene = assign_lanes(samples[args.window].scene, cfg.T_f)
    tensor = build_interaction_tensor(scene, cfg.threshold_D, args.mode == "all")
    coef = CoefficientConfig(args.horizon_T, args.epsilon, args.part)
    A = attention_matrix(tensor, coef)
    sums = A.alpha.sum(axis=0)
    populated = tensor.mask.any(axis=0)
    if np.any(sums[~populated] != 0.0) or np.any(np.abs(sums[populated & (sums > 0)] - 1) > 1e-9):
        raise InvariantViolation("attention columns are not stochastic")
    with _output(args.out) as fh:
        fh.write(A.to_csv())


def _predict(samples: Sequence[Sample], cfg: DatasetConfig, model: str) -> list[PredictionSet]:
    fn = predict_cv if model == "cv" else predict_ca
    return [fn(target_history(s.scene), cfg.T_f, s.scene.dt) for s in samples]


def cmd_predict(args) -> None:
    samples, cfg = load_samples(args)
    preds = _predict(samples, cfg, args.model)
    with _output(args.out) as fh:
        fh.write("window,target,step,x,y\n")
        for w, (sample, pred) in enumerate(zip(samples, preds)):
            for k, (x, y) in enumerate(pred.trajectories[0], start=1):
                fh.write(f"{w},{sample.scene.target_id},{k},{float(x)!r},{float(y)!r}\n")


def cmd_eval(args) -> None:
    samples, cfg = load_samples(args)
    if not samples:
        raise InvalidInputError("no complete window in the input")
    if args.modes < 1:
        raise InvalidInputError("--modes must be >= 1")
    preds = _predict(samples, cfg, args.model)
    gts = [s.future for s in samples]
    multi = [PredictionSet(np.repeat(p.trajectories, args.modes, axis=0)) for p in preds]
    ade = [min_ade(p, g) for p, g in zip(multi, gts)]
    fde = [min_fde(p, g) for p, g in zip(multi, gts)]
    report = {
        "model": args.model,
        "modes": args.modes,
        "n_samples": len(samples),
        "minADE": float(np.mean(ade)),
        "minFDE": float(np.mean(fde)),
        "loss_distance": float(np.mean([loss_distance(p, g) for p, g in zip(multi, gts)])),
        "rmse": rmse(preds, gts),
        "rmse_by_horizon": {f"{h:g}s": v for h, v in rmse_by_horizon(preds, gts, cfg.dt).items()},
    }
    if args.sigma is not None:
        report["loss_diversity"] = float(np.mean([loss_diversity(p, g, args.sigma)
                                                  for p, g in zip(multi, gts)]))
    if args.per_sample:
        with open(args.per_sample, "w") as fh:
            fh.write("window,target,ade,fde\n")
            for w, (s, a, f) in enumerate(zip(samples, ade, fde)):
                fh.write(f"{w},{s.scene.target_id},{a!r},{f!r}\n")
    with _output(args.out) as fh:
        json.dump(report, fh, indent=1)
        fh.write("\n")


def cmd_bench(args) -> None:
    report = bench_mod.run_benchmark(seed=args.seed, density=args.density, radius=args.radius,
                                     n_scenes=args.scenes, reps=args.reps,
                                     strategies=args.strategies)
    with _output(args.out) as fh:
        if args.format == "json":
            json.dump(report.to_json(), fh, indent=1)
            fh.write("\n")
        else:
            fh.write(report.to_csv())
    print(f"alg1 AS / (radius-all AS + slot assembly) = {report.guard_ratio:.3f}; "
          f"mean agents within D = {report.agents_in_radius:.1f}", file=sys.stderr)


def cmd_synth(args) -> None:
    spec_kwargs = {}
    cfg = _dataset_config(args)
    if cfg is not None:
        spec_kwargs = dict(dt=cfg.dt, T_h=cfg.T_h, T_f=cfg.T_f, threshold_D=cfg.threshold_D)
    result = synthesize(SynthSpec(seed=args.seed, lane_layout=args.layout, n_agents=args.n_agents,
                                  density_radius=args.radius, motion=args.motion,
                                  n_windows=args.windows, **spec_kwargs))
    with _output(args.out) as fh:
        fh.write(trajectories_to_csv(result.tracks))
    if args.lanes_out:
        with open(args.lanes_out, "w") as fh:
            json.dump(lane_graph_to_json(result.lane_graph), fh, indent=1)


COMMANDS = {"select": cmd_select, "attn": cmd_attn, "predict": cmd_predict,
            "eval": cmd_eval, "bench": cmd_bench, "synth": cmd_synth}


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    except (TrajInteractError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
