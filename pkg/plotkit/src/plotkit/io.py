"""Readers for the published run-artifact formats.

Three inputs exist: the per-step trace CSV, the per-episode training log CSV,
and the tab-separated comparison table that `compare` prints. Each reader
validates the header before touching a data row and raises SchemaError on
any layout it does not recognize, so a figure is never rendered from a file
that merely looks similar.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

TRACE_COLUMNS = (
    "episode", "step", "uav_id", "x", "y", "z", "serving_bs", "network_kind",
    "sinr_dB", "rate_bps", "switched", "r_top", "r_low", "c_qos", "c_bnd", "done",
)

TRAINING_LOG_COLUMNS = (
    "episode", "steps", "top_return", "low_return", "ddqn_loss", "critic1_loss",
    "critic2_loss", "actor_loss", "alpha", "lambda_qos", "lambda_bnd", "epsilon",
    "arrived",
)

COMPARE_COLUMNS = ("policy", "metric", "value")

NETWORK_KINDS = ("gn", "an", "sn")

_TRACE_INT = ("episode", "step", "uav_id", "serving_bs")
_TRACE_BOOL = ("switched", "done")
_LOG_INT = ("episode", "steps", "arrived")


class SchemaError(ValueError):
    """Input file does not match the published layout."""


def _read_csv(path, expected_columns, kind):
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: no such file")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty file, expected a {kind} header")
    if tuple(rows[0]) != tuple(expected_columns):
        raise SchemaError(f"{path}: header {rows[0]!r} is not the {kind} layout")
    if len(rows) == 1:
        raise SchemaError(f"{path}: {kind} has a header but no rows")
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(expected_columns):
            raise SchemaError(f"{path}: line {i} has {len(row)} fields, "
                              f"expected {len(expected_columns)}")
    return rows[1:]


def _as_int(v):
    # count columns may arrive float-formatted ("60.0"); reject fractional values
    f = float(v)
    i = int(f)
    if i != f:
        raise ValueError(f"{v!r} is not an integer")
    return i


def _columns(rows, names, int_names, bool_names=()):
    out = {}
    for j, name in enumerate(names):
        raw = [row[j] for row in rows]
        if name in int_names:
            out[name] = np.array([_as_int(v) for v in raw], dtype=np.int64)
        elif name in bool_names:
            out[name] = np.array([bool(_as_int(v)) for v in raw])
        elif name == "network_kind":
            out[name] = np.array(raw, dtype=object)
        else:
            out[name] = np.array([float(v) for v in raw])
    return out


def read_trace(path) -> dict[str, np.ndarray]:
    """Parse a step trace into column arrays; rejects unknown network kinds."""
    rows = _read_csv(path, TRACE_COLUMNS, "trace")
    data = _columns(rows, TRACE_COLUMNS, _TRACE_INT, _TRACE_BOOL)
    bad = set(data["network_kind"]) - set(NETWORK_KINDS)
    if bad:
        raise SchemaError(f"{path}: unknown network kinds {sorted(bad)}")
    return data


def read_training_log(path) -> dict[str, np.ndarray]:
    rows = _read_csv(path, TRAINING_LOG_COLUMNS, "training log")
    return _columns(rows, TRAINING_LOG_COLUMNS, _LOG_INT)


def read_compare_table(path) -> list[tuple[str, str, float]]:
    """Parse the tab-separated (policy, metric, value) table."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: no such file")
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise SchemaError(f"{path}: empty file, expected a comparison table")
    header = tuple(lines[0].split("\t"))
    if header != COMPARE_COLUMNS:
        raise SchemaError(f"{path}: header {header!r} is not the "
                          f"(policy, metric, value) layout")
    if len(lines) == 1:
        raise SchemaError(f"{path}: table has a header but no rows")
    out = []
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != 3:
            raise SchemaError(f"{path}: line {i} has {len(parts)} fields, expected 3")
        try:
            value = float(parts[2])
        except ValueError as exc:
            raise SchemaError(f"{path}: line {i}: {parts[2]!r} is not a number") from exc
        out.append((parts[0], parts[1], value))
    return out
