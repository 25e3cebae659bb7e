"""Double DQN over the discrete association action {Remain, Switch}.

Online network selects the argmax at the next state, the target network
evaluates it: y = r + gamma * Q(s', argmax_a Q(s', a; w); w'). MSE loss,
one Adam step per batch, hard target sync on a fixed period.
"""

from __future__ import annotations

import numpy as np

from .approximator import Adam, Mlp
from .config import DdqnParams
from .errors import TrainingDivergence


class DdqnAgent:
    def __init__(self, state_dim: int, n_actions: int, params: DdqnParams,
                 rng: np.random.Generator):
        sizes = [state_dim] + list(params.hidden) + [n_actions]
        self.q = Mlp(sizes, rng)
        self.target = self.q.copy()
        self.adam = Adam(self.q, params.lr)
        self.p = params
        self.n_actions = n_actions

    # -- acting --------------------------------------------------------------

    def greedy_action(self, feats: np.ndarray, net: Mlp | None = None) -> int:
        """Argmax over Q with ties resolved to the lowest action index (Remain)."""
        qvals = (net or self.q)(feats)
        return int(np.argmax(qvals))

    def select_action(self, feats: np.ndarray, epsilon: float,
                      rng: np.random.Generator, explore: bool = True,
                      net: Mlp | None = None) -> int:
        if explore and rng.random() < epsilon:
            return int(rng.integers(self.n_actions))
        return self.greedy_action(feats, net)

    def epsilon_for_episode(self, episode: int, total_episodes: int) -> float:
        """Exponential decay hitting eps_final at eps_final_frac of the run."""
        horizon = max(1.0, self.p.eps_final_frac * total_episodes)
        ratio = self.p.eps_final / self.p.eps_init
        eps = self.p.eps_init * ratio ** (episode / horizon)
        return max(self.p.eps_final, eps)

    # -- learning ------------------------------------------------------------

    def td_targets(self, rewards: np.ndarray, next_states: np.ndarray,
                   dones: np.ndarray) -> np.ndarray:
        """Double-estimator targets; terminal transitions take y = r."""
        q_next_online, _ = self.q.forward(next_states)
        best = np.argmax(q_next_online, axis=1)
        q_next_target, _ = self.target.forward(next_states)
        bootstrap = q_next_target[np.arange(len(best)), best]
        return rewards + self.p.gamma * (1.0 - dones) * bootstrap

    def train_batch(self, states: np.ndarray, actions: np.ndarray,
                    rewards: np.ndarray, next_states: np.ndarray,
                    dones: np.ndarray) -> float:
        n = len(states)
        if n == 0:
            raise ValueError("empty batch")
        y = self.td_targets(rewards, next_states, dones)
        qvals, cache = self.q.forward(states)
        taken = qvals[np.arange(n), actions]
        err = taken - y
        loss = float(np.mean(err ** 2))
        if not np.isfinite(loss):
            raise TrainingDivergence("DDQN loss is non-finite")
        gout = np.zeros_like(qvals)
        gout[np.arange(n), actions] = 2.0 * err / n
        grads, _ = self.q.backward(cache, gout)
        self.adam.step(self.q, grads)
        return loss

    def maybe_sync_target(self, global_step: int) -> bool:
        """Hard copy w' <- w on sync-period boundaries."""
        if global_step % self.p.sync_period == 0:
            self.target.copy_from(self.q)
            return True
        return False
