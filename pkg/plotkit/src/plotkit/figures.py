"""The three figure types rendered from run artifacts.

Trajectories are drawn top-down with each step segment colored by the
serving network; training curves show raw per-episode returns under their
rolling means; comparisons show one bar group per metric with one bar per
policy. Every function validates its input before creating the output file
and never writes anything when validation fails.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402
from matplotlib.collections import LineCollection  # noqa: E402
from matplotlib.lines import Line2D  # noqa: E402

from .io import read_compare_table, read_trace, read_training_log  # noqa: E402

NETWORK_COLORS = {"gn": "#1f77b4", "an": "#2ca02c", "sn": "#d62728"}
NETWORK_LABELS = {"gn": "ground", "an": "aerial", "sn": "satellite"}
FORMATS = ("png", "svg")

_POLICY_CYCLE = ("#4c72b0", "#dd8452", "#55a868", "#c44e52",
                 "#8172b3", "#937860", "#da8bc3", "#8c8c8c")


def _resolve_format(out_image, fmt):
    if fmt is None:
        suffix = Path(out_image).suffix.lstrip(".").lower()
        fmt = suffix if suffix in FORMATS else "png"
    if fmt not in FORMATS:
        raise ValueError(f"unsupported format {fmt!r}, expected one of {FORMATS}")
    return fmt


def _save(fig, out_image, fmt):
    out = Path(out_image)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True)
    fig.savefig(out, format=fmt, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out


def rolling_mean(x, window: int) -> np.ndarray:
    """Trailing moving average; out[i] covers x[max(0, i-window+1) .. i]."""
    x = np.asarray(x, dtype=float)
    if window < 1:
        raise ValueError("window must be >= 1")
    out = np.empty(len(x))
    for i in range(len(x)):
        out[i] = x[max(0, i - window + 1):i + 1].mean()
    return out


def path_segments(points: np.ndarray) -> np.ndarray:
    """Consecutive-point segments of a polyline, shaped (n-1, 2, 2)."""
    points = np.asarray(points, dtype=float)
    return np.stack([points[:-1], points[1:]], axis=1)


def segment_colors(network_kinds) -> list[str]:
    """One color per segment, keyed by the arrival row's serving network."""
    return [NETWORK_COLORS[k] for k in list(network_kinds)[1:]]


def plot_trajectories(trace_path, out_image, fmt: str | None = None,
                      goal=None) -> Path:
    """Top-down flight paths, one per (episode, UAV), segments colored by
    serving network, with start/end markers; `goal` adds a goal star."""
    fmt = _resolve_format(out_image, fmt)
    data = read_trace(trace_path)

    fig, ax = plt.subplots(figsize=(6.4, 6.0))
    keys = sorted({(int(e), int(u)) for e, u in zip(data["episode"], data["uav_id"])})
    for episode, uav in keys:
        mask = (data["episode"] == episode) & (data["uav_id"] == uav)
        pts = np.column_stack([data["x"][mask], data["y"][mask]])
        kinds = data["network_kind"][mask]
        if len(pts) >= 2:
            ax.add_collection(LineCollection(
                path_segments(pts), colors=segment_colors(kinds), linewidths=1.6))
        ax.plot(pts[0, 0], pts[0, 1], marker="o", color="black",
                markersize=5, zorder=3)
        ax.plot(pts[-1, 0], pts[-1, 1], marker="s", color="black",
                markerfacecolor="white", markersize=5, zorder=3)
    if goal is not None:
        ax.plot(goal[0], goal[1], marker="*", color="goldenrod",
                markersize=16, markeredgecolor="black", zorder=4)

    handles = [Line2D([], [], color=NETWORK_COLORS[k], label=NETWORK_LABELS[k])
               for k in NETWORK_COLORS]
    handles.append(Line2D([], [], marker="o", color="black", linestyle="none",
                          markersize=5, label="start"))
    handles.append(Line2D([], [], marker="s", color="black", linestyle="none",
                          markerfacecolor="white", markersize=5, label="end"))
    if goal is not None:
        handles.append(Line2D([], [], marker="*", color="goldenrod",
                              linestyle="none", markeredgecolor="black",
                              markersize=12, label="goal"))
    ax.legend(handles=handles, loc="best", fontsize=8)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title("Flight paths by serving network")
    ax.set_aspect("equal", adjustable="datalim")
    ax.autoscale_view()
    return _save(fig, out_image, fmt)


def plot_convergence(training_log, out_image, fmt: str | None = None,
                     window: int = 30) -> Path:
    """Per-episode returns for both decision levels, raw and rolling-mean."""
    fmt = _resolve_format(out_image, fmt)
    data = read_training_log(training_log)
    episodes = data["episode"]

    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for column, label, color in (("top_return", "association level", "#1f77b4"),
                                 ("low_return", "motion level", "#d62728")):
        raw = data[column]
        ax.plot(episodes, raw, color=color, alpha=0.25, linewidth=0.8)
        ax.plot(episodes, rolling_mean(raw, window), color=color,
                linewidth=1.8, label=f"{label} (window {window})")
    ax.set_xlabel("episode")
    ax.set_ylabel("episode return")
    ax.set_title("Training convergence")
    ax.legend(loc="lower right", fontsize=9)
    ax.grid(alpha=0.3)
    return _save(fig, out_image, fmt)


def table_by_metric(rows) -> dict[str, dict[str, float]]:
    """Regroup (policy, metric, value) rows as {metric: {policy: value}},
    preserving first-appearance order of both keys."""
    out: dict[str, dict[str, float]] = {}
    for policy, metric, value in rows:
        out.setdefault(metric, {})[policy] = value
    return out


def plot_comparison(compare_table, out_image, fmt: str | None = None) -> Path:
    """One bar panel per metric, one bar per policy, shared colors."""
    fmt = _resolve_format(out_image, fmt)
    rows = read_compare_table(compare_table)
    grouped = table_by_metric(rows)
    policies = list(dict.fromkeys(policy for policy, _, _ in rows))
    colors = {p: _POLICY_CYCLE[i % len(_POLICY_CYCLE)]
              for i, p in enumerate(policies)}

    metrics = list(grouped)
    fig, axes = plt.subplots(1, len(metrics),
                             figsize=(2.3 * len(metrics) + 1.2, 3.6))
    if len(metrics) == 1:
        axes = [axes]
    for ax, metric in zip(axes, metrics):
        values = [grouped[metric].get(p, np.nan) for p in policies]
        ax.bar(range(len(policies)), values,
               color=[colors[p] for p in policies])
        ax.set_title(metric, fontsize=9)
        ax.set_xticks([])
        ax.tick_params(labelsize=8)
    handles = [Line2D([], [], marker="s", linestyle="none",
                      color=colors[p], label=p) for p in policies]
    fig.legend(handles=handles, loc="lower center",
               ncol=min(len(policies), 4), fontsize=8)
    fig.suptitle("Policy comparison", fontsize=11)
    fig.tight_layout(rect=(0, 0.12, 1, 1))
    return _save(fig, out_image, fmt)
