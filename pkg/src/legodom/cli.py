"""Command-line front end: replay logs through the estimator, run the
simulator presets, compute closure metrics, and inspect diagnostics.

Exit codes: 0 ok, 2 log parse error, 3 config validation error.
"""

import argparse
import json
import sys

from .config import ConfigError, EstimatorConfig, load_config
from .estimator import Estimator
from .gait import PRESETS, degrade, generate_gait, preset_plan
from .logio import (LogParseError, read_frames, read_trajectory,
                    write_diagnostics, write_frames, write_trajectory)
from .metrics import compute_metrics
from .planfile import load_plan


def _load_config_arg(path):
    if path is None:
        return EstimatorConfig()
    return load_config(path)


def cmd_replay(args):
    try:
        cfg = _load_config_arg(args.config)
    except (ConfigError, OSError) as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 3
    try:
        frames = read_frames(args.log)
    except LogParseError as exc:
        print("log parse error: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("cannot read log: %s" % exc, file=sys.stderr)
        return 2

    est = Estimator(cfg)
    states = []
    diags = []
    for fr in frames:
        states.append(est.step(fr))
        diags.append(est.diagnostics())
    write_trajectory(args.out, states)
    write_diagnostics(args.out + ".diag.jsonl", diags)
    if not frames:
        print("warning: empty log, wrote empty trajectory", file=sys.stderr)
    else:
        print("replayed %d frames -> %s" % (len(frames), args.out))
    return 0


def cmd_simulate(args):
    try:
        if args.plan:
            plan = load_plan(args.plan)
        else:
            plan = preset_plan(args.preset)
    except (ConfigError, ValueError, OSError) as exc:
        print("plan error: %s" % exc, file=sys.stderr)
        return 3
    result = generate_gait(plan)
    frames = result.frames
    if plan.imperfections:
        frames = degrade(frames, plan.imperfections, seed=args.seed,
                         contacts=result.contacts, legs=plan.legs)
    write_frames(args.out, frames)
    if args.ground_truth:
        write_trajectory(args.ground_truth, result.truth)
    print("simulated %d frames -> %s" % (len(frames), args.out))
    return 0


def cmd_metrics(args):
    traj = read_trajectory(args.trajectory)
    gt = read_trajectory(args.ground_truth) if args.ground_truth else None
    print(json.dumps(compute_metrics(traj, gt), indent=2))
    return 0


def cmd_inspect(args):
    try:
        cfg = _load_config_arg(args.config)
    except (ConfigError, OSError) as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 3
    try:
        frames = read_frames(args.log)
    except LogParseError as exc:
        print("log parse error: %s" % exc, file=sys.stderr)
        return 2
    est = Estimator(cfg)
    for fr in frames:
        est.step(fr)
    print(json.dumps(est.diagnostics(), indent=2))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="legodom",
                                description="contact-anchored proprioceptive odometry")
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("replay", help="run a sensor log through the estimator")
    pr.add_argument("--log", required=True, help="sensor log (JSON lines)")
    pr.add_argument("--config", default=None, help="estimator config file")
    pr.add_argument("--out", required=True, help="trajectory CSV output")
    pr.set_defaults(func=cmd_replay)

    ps = sub.add_parser("simulate", help="generate a synthetic sensor log")
    src = ps.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=PRESETS)
    src.add_argument("--plan", help="plan file")
    ps.add_argument("--out", required=True, help="sensor log output")
    ps.add_argument("--ground-truth", default=None,
                    help="also write the ground-truth trajectory CSV here")
    ps.add_argument("--seed", type=int, default=0,
                    help="seed for the degradation randomness")
    ps.set_defaults(func=cmd_simulate)

    pm = sub.add_parser("metrics", help="closure metrics of a trajectory")
    pm.add_argument("trajectory", help="trajectory CSV")
    pm.add_argument("--ground-truth", default=None, help="ground-truth CSV")
    pm.set_defaults(func=cmd_metrics)

    pi = sub.add_parser("inspect", help="dump final planes/anchors diagnostics")
    pi.add_argument("--log", required=True)
    pi.add_argument("--config", default=None)
    pi.set_defaults(func=cmd_inspect)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
