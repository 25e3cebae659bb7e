"""Interleaved two-level training loop with shared replay and exact resume.

Per executed environment step the association agent acts, its transition is
stored and one batch update runs (after warm-up), the target net hard-syncs on
period boundaries, then the motion agent acts, its transition (with the cost
vector) is stored and one full constrained-SAC cycle runs. The acting policy
uses parameter snapshots taken at episode boundaries; learners update the live
parameters. With several UAVs the rollouts advance round-robin per step over
shared networks and buffers.

Checkpoints capture every mutable field (parameters, optimizer moments, replay
contents, RNG states, counters), so a split run resumes bit-exactly.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .baselines import (AXIS_DIRECTIONS, PolicySpec, get_policy,
                        rule_association_target)
from .checkpoint import load_checkpoint, save_checkpoint
from .config import RunConfig, config_from_dict, validate_config
from .csac import CsacAgent
from .ddqn import DdqnAgent
from .env import ACTION_DIM, STATE_DIM, SaginEnv, unit_direction
from .errors import TrainingDivergence
from .metrics import CsvWriter, MetricSummary, network_name, sinr_db
from .replay import ReplayBuffer
from .scenario import World, deploy_scenario

_RNG_NAMES = ("top_act", "low_act", "x1", "x2", "update", "start")


class Trainer:
    def __init__(self, config: RunConfig, policy: str | PolicySpec = "hdrl",
                 world: World | None = None):
        validate_config(config)
        self.cfg = config
        self.spec = get_policy(policy) if isinstance(policy, str) else policy
        self.world = world if world is not None else deploy_scenario(config)
        self.episode = 0
        self.global_step = 0

        ss = np.random.SeedSequence(config.train.seed)
        streams = ss.spawn(len(_RNG_NAMES))
        self.rngs = {name: np.random.default_rng(s)
                     for name, s in zip(_RNG_NAMES, streams)}
        env_streams = ss.spawn(config.train.n_uavs)
        self.envs = [SaginEnv(self.world, config.env, np.random.default_rng(s),
                              arrival_radius=config.arrival_radius)
                     for s in env_streams]

        init_rng = np.random.default_rng(ss.spawn(1)[0])
        self.ddqn: DdqnAgent | None = None
        self.csac: CsacAgent | None = None
        self.flat: DdqnAgent | None = None
        self.x1: ReplayBuffer | None = None
        self.x2: ReplayBuffer | None = None

        if self.spec.top == "ddqn":
            self.ddqn = DdqnAgent(STATE_DIM, 2, config.ddqn, init_rng)
            self.x1 = ReplayBuffer(config.ddqn.capacity, {
                "state": STATE_DIM, "action": 0, "reward": 0,
                "next_state": STATE_DIM, "done": 0, "uav": 0})
        if self.spec.low in ("csac", "sac"):
            csac_params = config.csac
            if self.spec.low == "sac":
                # unconstrained ablation: multipliers pinned at zero
                csac_params = dataclasses.replace(csac_params, eta_lambda=0.0)
            self.csac = CsacAgent(STATE_DIM, ACTION_DIM, csac_params, init_rng,
                                  n_costs=2,
                                  cost_thresholds=[config.env.d_qos, config.env.d_bnd])
            self.x2 = ReplayBuffer(config.csac.capacity, {
                "state": STATE_DIM, "action": ACTION_DIM, "direction": ACTION_DIM,
                "reward": 0, "c_qos": 0, "c_bnd": 0,
                "next_state": STATE_DIM, "done": 0, "uav": 0})
        elif self.spec.low == "flat":
            self.flat = DdqnAgent(STATE_DIM, len(AXIS_DIRECTIONS), config.ddqn,
                                  init_rng)
            self.x2 = ReplayBuffer(config.ddqn.capacity, {
                "state": STATE_DIM, "action": 0, "reward": 0,
                "next_state": STATE_DIM, "done": 0, "uav": 0})

    # -- rollouts ------------------------------------------------------------

    def _rollout(self, episode_label: int, envs: list[SaginEnv], training: bool,
                 eps: float, rng_top, rng_low, rng_start, trace_writer=None):
        cfg = self.cfg
        n_uavs = len(envs)
        if training:
            q_snap = self.ddqn.q.copy() if self.ddqn else None
            actor_snap = self.csac.actor.copy() if self.csac else None
            flat_snap = self.flat.q.copy() if self.flat else None
        else:
            q_snap = actor_snap = flat_snap = None

        for env in envs:
            start = rng_start.uniform(cfg.env.start_lo, cfg.env.start_hi)
            env.reset(start)
        done = [False] * n_uavs
        arrived = [False] * n_uavs
        top_ret = np.zeros(n_uavs)
        low_ret = np.zeros(n_uavs)
        losses = {"ddqn": [], "critic1": [], "critic2": [], "actor": []}
        alpha = self.csac.alpha if self.csac else float("nan")
        lambdas = self.csac.lambdas.copy() if self.csac else np.array([np.nan, np.nan])

        for n in range(cfg.env.n_max_steps):
            if all(done):
                break
            for u, env in enumerate(envs):
                if done[u]:
                    continue
                # association level
                if n % cfg.train.top_every == 0:
                    feats = env.encode_state()
                    if self.spec.top == "ddqn":
                        action = self.ddqn.select_action(
                            feats, eps, rng_top, explore=training, net=q_snap)
                        out_top = env.apply_top_action(action)
                        if training:
                            self.x1.push(
                                state=feats, action=action, reward=out_top.reward,
                                next_state=env.encode_state(),
                                done=float(env.budget_exhausted_next()), uav=u)
                    else:
                        target = rule_association_target(env, self.spec.top)
                        out_top = env.set_association(target)
                else:
                    out_top = None
                if training and self.ddqn and len(self.x1) >= cfg.ddqn.batch_size:
                    b = self.x1.sample(cfg.ddqn.batch_size, self.rngs["x1"])
                    losses["ddqn"].append(self.ddqn.train_batch(
                        b["state"], b["action"].astype(int), b["reward"],
                        b["next_state"], b["done"]))
                if training:
                    self.global_step += 1
                    if self.ddqn:
                        self.ddqn.maybe_sync_target(self.global_step)

                # motion level
                low_feats = env.encode_state()
                sample = None
                flat_action = None
                if self.csac is not None:
                    if training:
                        sample = self.csac.sample(low_feats, rng_low, net=actor_snap)
                        raw = sample.raw
                    else:
                        raw = self.csac.mean_action(low_feats)
                    direction = env.goalward(unit_direction(raw, env.goal_unit()))
                elif self.flat is not None:
                    flat_action = self.flat.select_action(
                        low_feats, eps, rng_top, explore=training, net=flat_snap)
                    direction = env.goalward(AXIS_DIRECTIONS[flat_action])
                else:
                    direction = env.goal_unit()
                out = env.apply_low_action(direction)

                if training and self.csac is not None:
                    self.x2.push(
                        state=low_feats, action=sample.pre_squash,
                        direction=direction, reward=out.reward,
                        c_qos=out.cost_qos, c_bnd=out.cost_bnd,
                        next_state=env.encode_state(), done=float(out.done), uav=u)
                    if len(self.x2) >= cfg.csac.batch_size:
                        b = self.x2.sample(cfg.csac.batch_size, self.rngs["x2"])
                        stats = self.csac.update(
                            b["state"], np.tanh(b["action"]), b["reward"],
                            np.column_stack([b["c_qos"], b["c_bnd"]]),
                            b["next_state"], b["done"], self.rngs["update"])
                        losses["critic1"].append(stats["critic1_loss"])
                        losses["critic2"].append(stats["critic2_loss"])
                        losses["actor"].append(stats["actor_loss"])
                        alpha = stats["alpha"]
                        lambdas = stats["lambdas"]
                elif training and self.flat is not None:
                    self.x2.push(state=low_feats, action=flat_action,
                                 reward=out.reward, next_state=env.encode_state(),
                                 done=float(out.done), uav=u)
                    if len(self.x2) >= cfg.ddqn.batch_size:
                        b = self.x2.sample(cfg.ddqn.batch_size, self.rngs["x2"])
                        losses["ddqn"].append(self.flat.train_batch(
                            b["state"], b["action"].astype(int), b["reward"],
                            b["next_state"], b["done"]))
                        self.flat.maybe_sync_target(self.global_step)

                if out_top is not None:
                    top_ret[u] += out_top.reward
                low_ret[u] += out.reward
                if trace_writer is not None:
                    pos = out.state.position
                    trace_writer.write({
                        "episode": episode_label, "step": env.counters.step_count - 1,
                        "uav_id": u, "x": float(pos[0]), "y": float(pos[1]),
                        "z": float(pos[2]), "serving_bs": out.state.serving,
                        "network_kind": network_name(
                            self.world.network[out.state.serving]),
                        "sinr_dB": sinr_db(out.sinr), "rate_bps": out.state.rate_bps,
                        "switched": out_top.switched if out_top else False,
                        "r_top": out_top.reward if out_top else 0.0,
                        "r_low": out.reward, "c_qos": out.cost_qos,
                        "c_bnd": out.cost_bnd, "done": out.done})
                if out.done:
                    done[u] = True
                    arrived[u] = out.arrived

        counters = [env.counters for env in envs]
        steps = np.array([c.step_count for c in counters], dtype=float)
        return {
            "episode": episode_label,
            "steps": float(steps.mean()),
            "top_return": float(top_ret.mean()),
            "low_return": float(low_ret.mean()),
            "ddqn_loss": float(np.mean(losses["ddqn"])) if losses["ddqn"] else 0.0,
            "critic1_loss": float(np.mean(losses["critic1"])) if losses["critic1"] else 0.0,
            "critic2_loss": float(np.mean(losses["critic2"])) if losses["critic2"] else 0.0,
            "actor_loss": float(np.mean(losses["actor"])) if losses["actor"] else 0.0,
            "alpha": float(alpha),
            "lambda_qos": float(lambdas[0]),
            "lambda_bnd": float(lambdas[1]),
            "epsilon": eps,
            "arrived": float(np.mean(arrived)),
            "switch_count": float(np.mean([c.switch_count for c in counters])),
            "qos_ratio": float(np.mean([c.qos_satisfied_steps / max(1, c.step_count)
                                        for c in counters])),
            "avg_rate": float(np.mean([c.cumulative_rate / max(1, c.step_count)
                                       for c in counters])),
            "flight_time": float(steps.mean() * self.cfg.env.dt_s),
        }

    def run(self, episodes: int | None = None, log_writer: CsvWriter | None = None,
            trace_writer=None, diagnostic_path=None) -> list[dict]:
        """Train for the given number of episodes (default: the configured total)."""
        if episodes is None:
            episodes = self.cfg.train.episodes - self.episode
        history = []
        total = self.cfg.train.episodes
        try:
            for _ in range(episodes):
                eps = (self.ddqn.epsilon_for_episode(self.episode, total)
                       if self.ddqn else
                       self.flat.epsilon_for_episode(self.episode, total)
                       if self.flat else 0.0)
                stats = self._rollout(
                    self.episode, self.envs, training=True, eps=eps,
                    rng_top=self.rngs["top_act"], rng_low=self.rngs["low_act"],
                    rng_start=self.rngs["start"], trace_writer=trace_writer)
                self.episode += 1
                history.append(stats)
                if log_writer is not None:
                    log_writer.write(stats)
        except TrainingDivergence:
            if diagnostic_path is not None:
                self.save(diagnostic_path)
            raise
        return history

    def evaluate(self, n_episodes: int, seed: int,
                 trace_writer=None) -> list[dict]:
        """Deterministic-policy rollouts on fresh streams; touches no trained state."""
        ss = np.random.SeedSequence(seed)
        env_streams = ss.spawn(len(self.envs))
        envs = [SaginEnv(self.world, self.cfg.env, np.random.default_rng(s),
                         arrival_radius=self.cfg.arrival_radius)
                for s in env_streams]
        aux = ss.spawn(2)
        rng_start = np.random.default_rng(aux[0])
        rng_unused = np.random.default_rng(aux[1])
        return [self._rollout(ep, envs, training=False, eps=0.0,
                              rng_top=rng_unused, rng_low=rng_unused,
                              rng_start=rng_start, trace_writer=trace_writer)
                for ep in range(n_episodes)]

    # -- persistence ---------------------------------------------------------

    def state(self) -> tuple[dict, dict[str, np.ndarray]]:
        arrays: dict[str, np.ndarray] = {}
        adam_t: dict[str, int] = {}

        def put_net(prefix, net):
            for i, (w, b) in enumerate(zip(net.weights, net.biases)):
                arrays[f"{prefix}.w{i}"] = w
                arrays[f"{prefix}.b{i}"] = b

        def put_adam(prefix, adam):
            for i, (m, v) in enumerate(zip(adam.m, adam.v)):
                arrays[f"{prefix}.m{i}"] = m
                arrays[f"{prefix}.v{i}"] = v
            adam_t[prefix] = adam.t

        buffers = {}
        if self.ddqn:
            put_net("ddqn.q", self.ddqn.q)
            put_net("ddqn.target", self.ddqn.target)
            put_adam("ddqn.adam", self.ddqn.adam)
        if self.flat:
            put_net("flat.q", self.flat.q)
            put_net("flat.target", self.flat.target)
            put_adam("flat.adam", self.flat.adam)
        if self.csac:
            a = self.csac
            for prefix, net in (("csac.actor", a.actor), ("csac.q1", a.q1),
                                ("csac.q2", a.q2), ("csac.q1t", a.q1_target),
                                ("csac.q2t", a.q2_target)):
                put_net(prefix, net)
            put_adam("csac.actor_adam", a.actor_adam)
            put_adam("csac.q1_adam", a.q1_adam)
            put_adam("csac.q2_adam", a.q2_adam)
            arrays["csac.log_alpha"] = np.array([a.log_alpha])
            arrays["csac.alpha_adam_mv"] = np.array([a.alpha_adam.m, a.alpha_adam.v])
            adam_t["csac.alpha_adam"] = a.alpha_adam.t
            arrays["csac.lambdas"] = a.lambdas
        if self.x1 is not None:
            arrays.update(self.x1.state_arrays("buf.x1"))
            buffers["x1"] = self.x1.state_meta()
        if self.x2 is not None:
            arrays.update(self.x2.state_arrays("buf.x2"))
            buffers["x2"] = self.x2.state_meta()

        meta = {
            "kind": "trainer",
            "policy": self.spec.name,
            "config": self.cfg.to_dict(),
            "episode": self.episode,
            "global_step": self.global_step,
            "adam_t": adam_t,
            "buffers": buffers,
            "rng": {name: self.rngs[name].bit_generator.state
                    for name in _RNG_NAMES},
            "env_rng": [env.rng.bit_generator.state for env in self.envs],
        }
        return meta, arrays

    def save(self, path) -> None:
        meta, arrays = self.state()
        save_checkpoint(path, meta, arrays)

    def _restore(self, meta: dict, arrays: dict[str, np.ndarray]) -> None:
        def get_net(prefix, net):
            for i in range(net.n_layers):
                net.weights[i][...] = arrays[f"{prefix}.w{i}"]
                net.biases[i][...] = arrays[f"{prefix}.b{i}"]

        def get_adam(prefix, adam):
            for i in range(len(adam.m)):
                adam.m[i][...] = arrays[f"{prefix}.m{i}"]
                adam.v[i][...] = arrays[f"{prefix}.v{i}"]
            adam.t = int(meta["adam_t"][prefix])

        if self.ddqn:
            get_net("ddqn.q", self.ddqn.q)
            get_net("ddqn.target", self.ddqn.target)
            get_adam("ddqn.adam", self.ddqn.adam)
        if self.flat:
            get_net("flat.q", self.flat.q)
            get_net("flat.target", self.flat.target)
            get_adam("flat.adam", self.flat.adam)
        if self.csac:
            a = self.csac
            for prefix, net in (("csac.actor", a.actor), ("csac.q1", a.q1),
                                ("csac.q2", a.q2), ("csac.q1t", a.q1_target),
                                ("csac.q2t", a.q2_target)):
                get_net(prefix, net)
            get_adam("csac.actor_adam", a.actor_adam)
            get_adam("csac.q1_adam", a.q1_adam)
            get_adam("csac.q2_adam", a.q2_adam)
            a.log_alpha = float(arrays["csac.log_alpha"][0])
            a.alpha_adam.m = float(arrays["csac.alpha_adam_mv"][0])
            a.alpha_adam.v = float(arrays["csac.alpha_adam_mv"][1])
            a.alpha_adam.t = int(meta["adam_t"]["csac.alpha_adam"])
            a.lambdas = arrays["csac.lambdas"].copy()
        if self.x1 is not None:
            self.x1.load_state(meta["buffers"]["x1"], arrays, "buf.x1")
        if self.x2 is not None:
            self.x2.load_state(meta["buffers"]["x2"], arrays, "buf.x2")
        self.episode = int(meta["episode"])
        self.global_step = int(meta["global_step"])
        for name in _RNG_NAMES:
            self.rngs[name].bit_generator.state = meta["rng"][name]
        for env, state in zip(self.envs, meta["env_rng"]):
            env.rng.bit_generator.state = state

    @classmethod
    def load(cls, path, world: World | None = None) -> "Trainer":
        meta, arrays = load_checkpoint(path)
        config = config_from_dict(meta["config"])
        trainer = cls(config, policy=meta["policy"], world=world)
        trainer._restore(meta, arrays)
        return trainer


def summarize_eval(rows: list[dict]) -> MetricSummary:
    """Collapse evaluate() episode rows into one summary record."""
    if not rows:
        raise ValueError("no evaluation episodes")
    return MetricSummary(
        n_episodes=len(rows),
        avg_rate_bps=float(np.mean([r["avg_rate"] for r in rows])),
        switch_count=float(np.mean([r["switch_count"] for r in rows])),
        qos_ratio=float(np.mean([r["qos_ratio"] for r in rows])),
        flight_time_s=float(np.mean([r["flight_time"] for r in rows])),
        top_return=float(np.mean([r["top_return"] for r in rows])),
        low_return=float(np.mean([r["low_return"] for r in rows])),
    )
