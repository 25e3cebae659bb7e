"""Evaluation metrics, trace/log file formats, and rate-bound calibration.

The step trace is a CSV with a fixed column set (one row per motion step);
readers validate the header and refuse unknown layouts. Aggregated summaries
are line-delimited JSON records carrying an explicit schema_version.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .config import NETWORK_NAMES, EnvParams
from .env import SaginEnv, unit_direction
from .scenario import World

SUMMARY_SCHEMA_VERSION = 1

TRACE_COLUMNS = (
    "episode", "step", "uav_id", "x", "y", "z", "serving_bs", "network_kind",
    "sinr_dB", "rate_bps", "switched", "r_top", "r_low", "c_qos", "c_bnd", "done",
)

TRAINING_LOG_COLUMNS = (
    "episode", "steps", "top_return", "low_return", "ddqn_loss", "critic1_loss",
    "critic2_loss", "actor_loss", "alpha", "lambda_qos", "lambda_bnd", "epsilon",
    "arrived",
)


class CsvWriter:
    """Append-only CSV writer with full-precision float formatting."""

    def __init__(self, path, columns, append: bool = False):
        self.columns = tuple(columns)
        mode = "a" if append else "w"
        self._fh = open(path, mode, newline="")
        self._writer = csv.writer(self._fh)
        if not append:
            self._writer.writerow(self.columns)

    def write(self, row: dict) -> None:
        self._writer.writerow([_fmt(row[c]) for c in self.columns])

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value


def read_trace(path) -> dict[str, np.ndarray]:
    """Load a step trace, rejecting files with an unexpected column layout."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        if header != TRACE_COLUMNS:
            raise ValueError(
                f"unsupported trace layout: header {header} != {TRACE_COLUMNS}")
        rows = list(reader)
    if not rows:
        raise ValueError("trace holds no step rows")
    cols = {name: [] for name in TRACE_COLUMNS}
    for row in rows:
        for name, value in zip(TRACE_COLUMNS, row):
            cols[name].append(value)
    out = {}
    for name, values in cols.items():
        if name == "network_kind":
            out[name] = np.array(values)
        elif name in ("episode", "step", "uav_id", "serving_bs", "switched", "done"):
            out[name] = np.array([int(v) for v in values])
        else:
            out[name] = np.array([float(v) for v in values])
    return out


@dataclass
class MetricSummary:
    """Per-run aggregates over evaluation episodes."""

    n_episodes: int
    avg_rate_bps: float        # mean serving-link rate over all steps
    switch_count: float        # mean association changes per episode-UAV
    qos_ratio: float           # fraction of steps meeting the rate requirement
    flight_time_s: float       # mean steps-to-termination times dt
    top_return: float = float("nan")
    low_return: float = float("nan")

    def to_json(self, **extra) -> str:
        record = {"schema_version": SUMMARY_SCHEMA_VERSION, **asdict(self), **extra}
        return json.dumps(record, sort_keys=True)


def compute_metrics(trace: dict[str, np.ndarray], dt_s: float) -> MetricSummary:
    """Recompute the headline metrics from raw step rows.

    Aggregation is per (episode, UAV) first, then an unweighted mean, matching
    the streaming per-rollout counters.
    """
    if len(trace["episode"]) == 0:
        raise ValueError("empty trace")
    keys = sorted(set(zip(trace["episode"].tolist(), trace["uav_id"].tolist())))
    switches, flight, rates, qos = [], [], [], []
    for ep, uav in keys:
        mask = (trace["episode"] == ep) & (trace["uav_id"] == uav)
        switches.append(int(trace["switched"][mask].sum()))
        flight.append(int(mask.sum()) * dt_s)
        rates.append(float(np.mean(trace["rate_bps"][mask])))
        qos.append(float(np.mean(trace["c_qos"][mask] == 0.0)))
    return MetricSummary(
        n_episodes=len({ep for ep, _ in keys}),
        avg_rate_bps=float(np.mean(rates)),
        switch_count=float(np.mean(switches)),
        qos_ratio=float(np.mean(qos)),
        flight_time_s=float(np.mean(flight)),
        top_return=float(np.sum(trace["r_top"]) / len(keys)),
        low_return=float(np.sum(trace["r_low"]) / len(keys)),
    )


def calibrate_rate_bounds(world: World, env_params: EnvParams, n_episodes: int,
                          seed: int) -> tuple[float, float]:
    """1st/99th percentile of serving rates under a random-direction,
    strongest-RSRP-association policy; the pair normalizes the rate reward."""
    if n_episodes <= 0:
        raise ValueError("need at least one calibration episode")
    ss = np.random.SeedSequence(seed)
    env_rng, dir_rng, start_rng = [np.random.default_rng(s) for s in ss.spawn(3)]
    env = SaginEnv(world, env_params, env_rng)
    rates = []
    for _ in range(n_episodes):
        start = start_rng.uniform(env_params.start_lo, env_params.start_hi)
        env.reset(start)
        done = False
        while not done:
            env.set_association(int(np.argmax(env.measurements.rsrp_dbm)))
            raw = dir_rng.standard_normal(3)
            direction = env.goalward(unit_direction(raw, env.goal_unit()))
            out = env.apply_low_action(direction)
            rates.append(out.state.rate_bps)
            done = out.done
    r_min = float(np.percentile(rates, 1.0))
    r_max = float(np.percentile(rates, 99.0))
    if not r_min < r_max:
        raise ValueError("degenerate rate distribution: calibration failed")
    return r_min, r_max


def network_name(code: int) -> str:
    return NETWORK_NAMES[code]


def sinr_db(sinr_linear: float) -> float:
    if sinr_linear <= 0:
        return -math.inf
    return 10.0 * math.log10(sinr_linear)
