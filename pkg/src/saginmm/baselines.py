"""Reference policies: rule-based associations, straight-line flight, a flat
discrete-action learner, and the single-level ablations of the full method.

Every bundle runs through the same rollout harness and budgets, so reported
differences come from the policy alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .env import SaginEnv

# six axis-aligned unit directions for the flat discretized agent
AXIS_DIRECTIONS = np.array([
    [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0], [0.0, -1.0, 0.0],
    [0.0, 0.0, 1.0], [0.0, 0.0, -1.0],
])


@dataclass(frozen=True)
class PolicySpec:
    """Which controller runs each level of the hierarchy.

    top: 'ddqn' (learned Remain/Switch) or a per-step rule
         'rsrp' / 'sinr' / 'rate' (serve the argmax cell).
    low: 'csac' (constrained learner), 'sac' (multipliers frozen at zero),
         'sl' (straight line), or 'flat' (discrete-direction learner).
    """

    name: str
    top: str
    low: str

    @property
    def trains_top(self) -> bool:
        return self.top == "ddqn"

    @property
    def trains_low(self) -> bool:
        return self.low in ("csac", "sac", "flat")

    @property
    def needs_training(self) -> bool:
        return self.trains_top or self.trains_low


POLICIES = {
    "hdrl": PolicySpec("hdrl", top="ddqn", low="csac"),
    "sl": PolicySpec("sl", top="rsrp", low="sl"),
    "drl": PolicySpec("drl", top="sinr", low="flat"),
    "rsrp_csac": PolicySpec("rsrp_csac", top="rsrp", low="csac"),
    "maxrate_csac": PolicySpec("maxrate_csac", top="rate", low="csac"),
    "ddqn_sac": PolicySpec("ddqn_sac", top="ddqn", low="sac"),
    "ddqn_sl": PolicySpec("ddqn_sl", top="ddqn", low="sl"),
    "greedy_sinr": PolicySpec("greedy_sinr", top="sinr", low="sl"),
}


def get_policy(name: str) -> PolicySpec:
    try:
        return POLICIES[name]
    except KeyError:
        raise ValueError(f"unknown policy {name!r}; choose from {sorted(POLICIES)}")


def straight_line_direction(position, goal) -> np.ndarray:
    """Unit vector from the current position straight to the goal."""
    to_goal = np.asarray(goal, dtype=float) - np.asarray(position, dtype=float)
    dist = np.linalg.norm(to_goal)
    if dist <= 0:
        raise ValueError("already at the goal")
    return to_goal / dist


def rule_association_target(env: SaginEnv, rule: str) -> int:
    """Per-step greedy association over all cells by the named criterion."""
    meas = env.measurements
    if rule == "rsrp":
        return int(np.argmax(meas.rsrp_dbm))
    if rule == "sinr":
        return int(np.argmax(meas.sinr))
    if rule == "rate":
        return int(np.argmax(meas.rate_bps))
    raise ValueError(f"unknown association rule {rule!r}")
