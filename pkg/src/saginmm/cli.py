"""Command-line entry points: calibrate, train, eval, compare, export-trace.

Output locations resolve in order: --out flag, SAGINMM_OUT environment
variable, then ./runs. Summaries print as line-delimited JSON records so they
pipe cleanly into the plotting tools.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import load_config, validate_config
from .errors import CheckpointError, ConfigError
from .metrics import TRACE_COLUMNS, TRAINING_LOG_COLUMNS, CsvWriter, calibrate_rate_bounds
from .scenario import deploy_scenario
from .trainer import Trainer, summarize_eval

CHECKPOINT_NAME = "checkpoint.bin"


def _out_dir(args) -> Path:
    path = Path(args.out or os.environ.get("SAGINMM_OUT", "runs"))
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load(args):
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg.train.seed = args.seed
    validate_config(cfg)
    return cfg


def cmd_calibrate(args) -> int:
    cfg = _load(args)
    world = deploy_scenario(cfg)
    episodes = args.calibration_episodes or cfg.train.calibration_episodes
    seed = args.seed if args.seed is not None else cfg.train.calibration_seed
    r_min, r_max = calibrate_rate_bounds(world, cfg.env, episodes, seed)
    cfg.env.r_min_bps = r_min
    cfg.env.r_max_bps = r_max
    out = _out_dir(args) / "config.json"
    cfg.save(out)
    print(f"rate bounds: [{r_min:.1f}, {r_max:.1f}] bps -> {out}")
    return 0


def cmd_train(args) -> int:
    out = _out_dir(args)
    if args.resume:
        trainer = Trainer.load(args.resume)
    else:
        cfg = _load(args)
        trainer = Trainer(cfg, policy=args.policy)
    log_path = out / "training_log.csv"
    trace_writer = None
    with CsvWriter(log_path, TRAINING_LOG_COLUMNS, append=bool(args.resume)) as log:
        if args.trace:
            trace_writer = CsvWriter(out / "train_trace.csv", TRACE_COLUMNS,
                                     append=bool(args.resume))
        try:
            trainer.run(episodes=args.episodes, log_writer=log,
                        trace_writer=trace_writer,
                        diagnostic_path=out / "diagnostic.bin")
        finally:
            if trace_writer is not None:
                trace_writer.close()
    ckpt = out / CHECKPOINT_NAME
    trainer.save(ckpt)
    print(f"trained {trainer.spec.name} to episode {trainer.episode} -> {ckpt}")
    return 0


def cmd_eval(args) -> int:
    out = _out_dir(args)
    trainer = Trainer.load(args.checkpoint)
    trace_writer = None
    if args.trace:
        trace_writer = CsvWriter(out / "eval_trace.csv", TRACE_COLUMNS)
    try:
        rows = trainer.evaluate(args.episodes, args.seed, trace_writer=trace_writer)
    finally:
        if trace_writer is not None:
            trace_writer.close()
    summary = summarize_eval(rows)
    line = summary.to_json(policy=trainer.spec.name, seed=args.seed)
    with open(out / "summary.jsonl", "a") as fh:
        fh.write(line + "\n")
    print(line)
    return 0


def cmd_compare(args) -> int:
    out = _out_dir(args)
    cfg = _load(args)
    world = deploy_scenario(cfg)
    policies = [p.strip() for p in args.policies.split(",") if p.strip()]
    if not policies:
        raise ConfigError("no policies given")
    summaries = {}
    for name in policies:
        trainer = Trainer(cfg, policy=name, world=world)
        if trainer.spec.needs_training:
            with CsvWriter(out / f"training_log_{name}.csv",
                           TRAINING_LOG_COLUMNS) as log:
                trainer.run(log_writer=log)
        rows = trainer.evaluate(args.episodes, args.seed)
        summaries[name] = summarize_eval(rows)
    with open(out / "summary.jsonl", "a") as fh:
        for name, summary in summaries.items():
            fh.write(summary.to_json(policy=name, seed=args.seed) + "\n")
    metrics = ("avg_rate_bps", "switch_count", "qos_ratio", "flight_time_s")
    print("policy\tmetric\tvalue")
    for name, summary in summaries.items():
        for metric in metrics:
            print(f"{name}\t{metric}\t{getattr(summary, metric)!r}")
    return 0


def cmd_export_trace(args) -> int:
    trainer = Trainer.load(args.checkpoint)
    path = Path(args.trace_out) if args.trace_out else _out_dir(args) / "trace.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with CsvWriter(path, TRACE_COLUMNS) as writer:
        trainer.evaluate(args.episodes, args.seed, trace_writer=writer)
    print(f"trace -> {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="saginmm",
        description="UAV mobility management testbed over a simulated "
                    "space-air-ground network")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="run config JSON")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None,
                       help="output directory (default: $SAGINMM_OUT or ./runs)")

    p = sub.add_parser("calibrate", help="measure rate normalization bounds")
    common(p)
    p.add_argument("--calibration-episodes", type=int, default=None)
    p.set_defaults(fn=cmd_calibrate)

    p = sub.add_parser("train", help="train a policy")
    common(p, config=False)
    p.add_argument("--config", default=None, help="run config JSON")
    p.add_argument("--policy", default="hdrl")
    p.add_argument("--episodes", type=int, default=None,
                   help="episodes to run now (default: top up to the "
                        "configured total)")
    p.add_argument("--resume", default=None, help="checkpoint to continue from")
    p.add_argument("--trace", action="store_true", help="also write step rows")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="run deterministic evaluation episodes")
    common(p, config=False)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--episodes", type=int, default=10)
    p.add_argument("--trace", action="store_true")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("compare", help="train and evaluate several policies "
                                       "on identical scenario draws")
    common(p)
    p.add_argument("--policies", required=True, help="comma-separated names")
    p.add_argument("--episodes", type=int, default=10,
                   help="evaluation episodes per policy")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("export-trace", help="dump per-step rows for a checkpoint")
    common(p, config=False)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--episodes", type=int, default=1)
    p.add_argument("--trace-out", default=None, help="output CSV path")
    p.set_defaults(fn=cmd_export_trace)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "train" and not args.resume and not args.config:
        parser.error("train needs --config (or --resume)")
    if args.command in ("eval", "export-trace") and args.seed is None:
        args.seed = 2
    try:
        return args.fn(args)
    except (ConfigError, CheckpointError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
