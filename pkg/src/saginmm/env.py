"""Two-timescale UAV environment over the deployed world.

Each control period the association level first chooses Remain/Switch over a
three-candidate set (strongest cell of each network, serving excluded), then
the motion level applies a unit direction scaled by v_max*dt. Rewards are
normalized link rate plus a handover penalty on the association level, and
normalized rate plus goal progress on the motion level; QoS and boundary
costs feed the constrained learner.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import Measurements, measure_all
from .config import AN, GN, SN, EnvParams
from .scenario import World


@dataclass
class UavState:
    """Link state shared by both decision levels: serving cell, rate, position."""

    serving: int
    rate_bps: float
    position: np.ndarray


@dataclass
class EpisodeCounters:
    switch_count: int = 0
    step_count: int = 0
    qos_satisfied_steps: int = 0
    cumulative_rate: float = 0.0


@dataclass
class TopOutcome:
    state: UavState          # post-association, pre-move
    reward: float
    switched: bool
    r_rate: float
    r_switch: float


@dataclass
class StepOutcome:
    state: UavState          # post-move
    reward: float
    cost_qos: float
    cost_bnd: float
    done: bool
    arrived: bool
    r_rate: float
    r_goal: float
    clamped: bool
    distance_to_goal: float
    sinr: float


REMAIN, SWITCH = 0, 1


def record_transition_switch(counters: EpisodeCounters, b_prev: int, b_next: int) -> bool:
    """Count an association change; returns whether one occurred."""
    switched = b_prev != b_next
    if switched:
        counters.switch_count += 1
    return switched


def goalward_direction(direction: np.ndarray, position: np.ndarray,
                       goal: np.ndarray) -> np.ndarray:
    """Project a unit direction onto the goal-ward half-space and renormalize.

    Directions already making progress pass through unchanged; an anti-goal
    component is removed, and a fully opposed direction falls back to the
    straight-to-goal unit vector.
    """
    to_goal = np.asarray(goal, dtype=float) - np.asarray(position, dtype=float)
    dist = np.linalg.norm(to_goal)
    if dist <= 0:
        return np.asarray(direction, dtype=float)
    g = to_goal / dist
    d = np.asarray(direction, dtype=float)
    comp = float(d @ g)
    if comp > 0:
        return d
    proj = d - comp * g
    norm = np.linalg.norm(proj)
    if norm < 1e-12:
        return g
    return proj / norm


def unit_direction(raw: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    """Normalize a raw action vector; a null vector takes the fallback."""
    raw = np.asarray(raw, dtype=float)
    norm = np.linalg.norm(raw)
    if norm < 1e-12:
        return np.asarray(fallback, dtype=float)
    return raw / norm


class SaginEnv:
    """Mutable per-UAV rollout state over an immutable shared world."""

    def __init__(self, world: World, params: EnvParams, rng: np.random.Generator,
                 arrival_radius: float | None = None, n_fading_draws: int | None = None):
        self.world = world
        self.p = params
        self.rng = rng
        self.arrival_radius = (arrival_radius if arrival_radius is not None
                               else params.v_max_mps * params.dt_s)
        self.n_draws = n_fading_draws
        self.counters = EpisodeCounters()
        self.state: UavState | None = None
        self.goal = np.array(params.goal, dtype=float)
        self.d_max = 1.0
        self._meas: Measurements | None = None

    # -- lifecycle -----------------------------------------------------------

    def reset(self, start, goal=None) -> UavState:
        start = np.array(start, dtype=float)
        if goal is not None:
            self.goal = np.array(goal, dtype=float)
        if not self.world.inside(start):
            raise ValueError(f"start {start} outside the world box")
        if np.array_equal(start, self.goal):
            raise ValueError("start and goal coincide")
        self.counters = EpisodeCounters()
        self.d_max = float(np.linalg.norm(start - self.goal))
        self._meas = measure_all(self.world, start, 0.0, self.rng, self.n_draws)
        serving = int(np.argmax(self._meas.rsrp_dbm))
        self.state = UavState(serving, float(self._meas.rate_bps[serving]), start)
        return self.state

    @property
    def t(self) -> float:
        return self.counters.step_count * self.p.dt_s

    @property
    def measurements(self) -> Measurements:
        if self._meas is None:
            raise RuntimeError("environment not reset")
        return self._meas

    # -- association level ---------------------------------------------------

    def candidate_set(self) -> list[int]:
        """Strongest-RSRP cell of each network, excluding the serving cell."""
        meas = self.measurements
        out = []
        for net in (GN, AN, SN):
            best = meas.best_in_network(net)
            if best is not None and best != self.state.serving:
                out.append(best)
        return out

    def resolve_switch_target(self) -> int:
        """Strongest-RSRP member of the candidate set."""
        cands = self.candidate_set()
        if not cands:
            return self.state.serving
        rsrp = self.measurements.rsrp_dbm
        return int(max(cands, key=lambda c: rsrp[c]))

    def set_association(self, target: int) -> TopOutcome:
        """Retarget the serving cell and score the decision."""
        if not 0 <= target < self.world.n_cells:
            raise ValueError(f"cell id {target} out of range")
        switched = record_transition_switch(self.counters, self.state.serving, target)
        rate = float(self.measurements.rate_bps[target])
        r_rate = self._norm_rate(rate)
        r_switch = -1.0 if switched else 0.0
        reward = self.p.lambda_rate * r_rate + self.p.lambda_switch * r_switch
        self.state = UavState(target, rate, self.state.position)
        return TopOutcome(self.state, reward, switched, r_rate, r_switch)

    def apply_top_action(self, action: int) -> TopOutcome:
        if action not in (REMAIN, SWITCH):
            raise ValueError(f"association action must be Remain(0)/Switch(1), got {action}")
        target = self.state.serving if action == REMAIN else self.resolve_switch_target()
        return self.set_association(target)

    # -- motion level --------------------------------------------------------

    def apply_low_action(self, direction: np.ndarray) -> StepOutcome:
        direction = np.asarray(direction, dtype=float)
        if abs(np.linalg.norm(direction) - 1.0) > 1e-6:
            raise ValueError("motion action must be a unit vector")
        step = self.p.v_max_mps * self.p.dt_s
        raw_pos = self.state.position + direction * step
        pos = np.clip(raw_pos, self.world.bounds_lo, self.world.bounds_hi)
        clamped = bool(np.any(pos != raw_pos))

        self.counters.step_count += 1
        self._meas = measure_all(self.world, pos, self.t, self.rng, self.n_draws)
        serving = self.state.serving
        rate = float(self._meas.rate_bps[serving])
        dist = float(np.linalg.norm(pos - self.goal))

        r_rate = self._norm_rate(rate)
        r_goal = (self.d_max - dist) / self.d_max  # D_min = 0
        reward = self.p.lambda_rate * r_rate + self.p.lambda_goal * r_goal
        cost_qos = max(0.0, (self.p.r_req_bps - rate) / self.p.r_req_bps)
        cost_bnd = -self.p.eta_bnd if clamped else 0.0

        self.counters.cumulative_rate += rate
        if rate >= self.p.r_req_bps:
            self.counters.qos_satisfied_steps += 1
        arrived = dist <= self.arrival_radius
        done = arrived or self.counters.step_count >= self.p.n_max_steps

        self.state = UavState(serving, rate, pos)
        return StepOutcome(
            state=self.state, reward=reward, cost_qos=cost_qos, cost_bnd=cost_bnd,
            done=done, arrived=arrived, r_rate=r_rate, r_goal=r_goal,
            clamped=clamped, distance_to_goal=dist,
            sinr=float(self._meas.sinr[serving]))

    # -- helpers -------------------------------------------------------------

    def goalward(self, direction: np.ndarray) -> np.ndarray:
        return goalward_direction(direction, self.state.position, self.goal)

    def goal_unit(self) -> np.ndarray:
        to_goal = self.goal - self.state.position
        dist = np.linalg.norm(to_goal)
        return to_goal / dist if dist > 0 else np.array([1.0, 0.0, 0.0])

    def budget_exhausted_next(self) -> bool:
        """Whether the upcoming motion step is the last one by budget."""
        return self.counters.step_count + 1 >= self.p.n_max_steps

    def _norm_rate(self, rate: float) -> float:
        return (rate - self.p.r_min_bps) / (self.p.r_max_bps - self.p.r_min_bps)

    def encode_state(self, state: UavState | None = None) -> np.ndarray:
        """Network input: box-normalized position, scaled rate, one-hot network."""
        if state is None:
            state = self.state
        span = self.world.bounds_hi - self.world.bounds_lo
        pos01 = (state.position - self.world.bounds_lo) / span
        onehot = np.zeros(3)
        onehot[self.world.network[state.serving]] = 1.0
        return np.concatenate([pos01, [state.rate_bps / self.p.r_max_bps], onehot])


STATE_DIM = 7
ACTION_DIM = 3
