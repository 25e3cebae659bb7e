"""Constrained soft actor-critic for continuous trajectory control.

Squashed-Gaussian actor with shared trunk and (mean, log-STD) heads, twin
critics with min-of-two targets, automatic entropy temperature, and Lagrange
multipliers updated by projected dual ascent. The penalized reward r - sum_i
lambda_i * c_i enters the soft target:

    y = (r - lambda . c) + gamma2 * (1 - done) * (min_i Q'_i(s', a') - alpha * log pi(a'|s'))

Gradients flow by hand through the reparameterized action a = tanh(mu + sigma*xi)
and the tanh change-of-variables correction, so the actor step matches what a
finite-difference probe of the loss reports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .approximator import Adam, Mlp, ScalarAdam
from .config import CsacParams
from .errors import TrainingDivergence

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)
_TANH_EPS = 1e-6  # keeps the change-of-variables term finite at |a| -> 1


@dataclass
class ActionSample:
    pre_squash: np.ndarray   # u = mu + sigma * xi
    raw: np.ndarray          # a = tanh(u), componentwise in (-1, 1)
    log_prob: np.ndarray | float
    direction: np.ndarray | None = None  # normalized executed direction


class CsacAgent:
    def __init__(self, state_dim: int, action_dim: int, params: CsacParams,
                 rng: np.random.Generator, n_costs: int = 2,
                 cost_thresholds=None):
        self.p = params
        self.state_dim = state_dim
        self.action_dim = action_dim
        actor_sizes = [state_dim] + list(params.hidden) + [2 * action_dim]
        critic_sizes = [state_dim + action_dim] + list(params.hidden) + [1]
        self.actor = Mlp(actor_sizes, rng)
        self.q1 = Mlp(critic_sizes, rng)
        self.q2 = Mlp(critic_sizes, rng)
        self.q1_target = self.q1.copy()
        self.q2_target = self.q2.copy()
        self.actor_adam = Adam(self.actor, params.lr)
        self.q1_adam = Adam(self.q1, params.lr)
        self.q2_adam = Adam(self.q2, params.lr)
        self.log_alpha = float(np.log(params.alpha_init))
        self.alpha_adam = ScalarAdam(params.lr)
        self.lambdas = np.zeros(n_costs)
        self.cost_thresholds = (np.zeros(n_costs) if cost_thresholds is None
                                else np.asarray(cost_thresholds, dtype=float))

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha))

    # -- policy --------------------------------------------------------------

    def _heads(self, feats: np.ndarray, net: Mlp | None = None):
        out, cache = (net or self.actor).forward(np.atleast_2d(np.asarray(feats, dtype=float)))
        mu = out[:, :self.action_dim]
        log_std_raw = out[:, self.action_dim:]
        log_std = np.clip(log_std_raw, self.p.log_std_min, self.p.log_std_max)
        return mu, log_std, log_std_raw, cache

    def sample(self, feats: np.ndarray, rng: np.random.Generator,
               net: Mlp | None = None) -> ActionSample:
        """Reparameterized draw with the tanh-corrected log-density."""
        feats = np.asarray(feats, dtype=float)
        single = feats.ndim == 1
        mu, log_std, _, _ = self._heads(feats, net)
        sigma = np.exp(log_std)
        xi = rng.standard_normal(mu.shape)
        u = mu + sigma * xi
        a = np.tanh(u)
        log_prob = self._log_prob_terms(xi, log_std, a)
        if single:
            return ActionSample(u[0], a[0], float(log_prob[0]))
        return ActionSample(u, a, log_prob)

    def mean_action(self, feats: np.ndarray, net: Mlp | None = None) -> np.ndarray:
        feats = np.asarray(feats, dtype=float)
        single = feats.ndim == 1
        mu, _, _, _ = self._heads(feats, net)
        a = np.tanh(mu)
        return a[0] if single else a

    @staticmethod
    def _log_prob_terms(xi: np.ndarray, log_std: np.ndarray, a: np.ndarray) -> np.ndarray:
        gauss = -0.5 * xi ** 2 - log_std - _LOG_SQRT_2PI
        correction = np.log(1.0 - a ** 2 + _TANH_EPS)
        return np.sum(gauss - correction, axis=-1)

    # -- targets and critics -------------------------------------------------

    def penalized_reward(self, rewards: np.ndarray, costs: np.ndarray) -> np.ndarray:
        return rewards - costs @ self.lambdas

    def soft_q_target(self, rewards: np.ndarray, costs: np.ndarray,
                      next_states: np.ndarray, dones: np.ndarray,
                      rng: np.random.Generator) -> np.ndarray:
        nxt = self.sample(next_states, rng)
        qin = np.concatenate([next_states, nxt.raw], axis=1)
        q1t, _ = self.q1_target.forward(qin)
        q2t, _ = self.q2_target.forward(qin)
        soft_value = np.minimum(q1t[:, 0], q2t[:, 0]) - self.alpha * nxt.log_prob
        return self.penalized_reward(rewards, costs) + self.p.gamma * (1.0 - dones) * soft_value

    def update_critics(self, states: np.ndarray, actions: np.ndarray,
                       rewards: np.ndarray, costs: np.ndarray,
                       next_states: np.ndarray, dones: np.ndarray,
                       rng: np.random.Generator) -> tuple[float, float]:
        """One Adam step on each critic against the shared soft target."""
        y = self.soft_q_target(rewards, costs, next_states, dones, rng)
        qin = np.concatenate([states, actions], axis=1)
        n = len(y)
        losses = []
        for net, adam in ((self.q1, self.q1_adam), (self.q2, self.q2_adam)):
            q, cache = net.forward(qin)
            err = q[:, 0] - y
            loss = float(np.mean(err ** 2))
            if not np.isfinite(loss):
                raise TrainingDivergence("critic loss is non-finite")
            grads, _ = net.backward(cache, (2.0 * err / n)[:, None])
            adam.step(net, grads)
            losses.append(loss)
        return losses[0], losses[1]

    # -- actor ---------------------------------------------------------------

    def actor_loss_and_grads(self, states: np.ndarray, xi: np.ndarray):
        """L = E[alpha * log pi(a|s) - min_i Q_i(s, a)] for a fixed noise draw.

        Returns (loss, trunk parameter grads, mean log-prob). The Gaussian
        density terms cancel against the reparameterization except for the
        -1 per log-STD unit, leaving d(log pi)/du = 2a(1-a^2)/(1-a^2+eps).
        """
        states = np.atleast_2d(np.asarray(states, dtype=float))
        n = states.shape[0]
        mu, log_std, log_std_raw, cache = self._heads(states)
        sigma = np.exp(log_std)
        u = mu + sigma * xi
        a = np.tanh(u)
        log_prob = self._log_prob_terms(xi, log_std, a)
        alpha = self.alpha

        qin = np.concatenate([states, a], axis=1)
        q1, c1 = self.q1.forward(qin)
        q2, c2 = self.q2.forward(qin)
        q_min = np.minimum(q1[:, 0], q2[:, 0])
        loss = float(np.mean(alpha * log_prob - q_min))
        if not np.isfinite(loss):
            raise TrainingDivergence("actor loss is non-finite")

        # d(-min Q)/da, routed through whichever critic attains the minimum
        use1 = q1[:, 0] <= q2[:, 0]
        ga = np.zeros_like(a)
        for net, cch, mask in ((self.q1, c1, use1), (self.q2, c2, ~use1)):
            if not mask.any():
                continue
            gout = np.where(mask, -1.0, 0.0)[:, None]
            _, gin = net.backward(cch, gout)
            ga[mask] = gin[mask, self.state_dim:]

        one_m_a2 = 1.0 - a ** 2
        w = 2.0 * a * one_m_a2 / (one_m_a2 + _TANH_EPS)
        g_u = alpha * w + ga * one_m_a2
        g_mu = g_u
        inside = (log_std_raw > self.p.log_std_min) & (log_std_raw < self.p.log_std_max)
        g_log_std = (g_u * sigma * xi - alpha) * inside
        gout_heads = np.concatenate([g_mu, g_log_std], axis=1) / n
        grads, _ = self.actor.backward(cache, gout_heads)
        return loss, grads, log_prob

    def update_actor(self, states: np.ndarray,
                     rng: np.random.Generator) -> tuple[float, np.ndarray]:
        """One Adam step on the actor; returns (loss, the fresh log-probs)."""
        states = np.atleast_2d(np.asarray(states, dtype=float))
        xi = rng.standard_normal((states.shape[0], self.action_dim))
        loss, grads, log_prob = self.actor_loss_and_grads(states, xi)
        self.actor_adam.step(self.actor, grads)
        return loss, log_prob

    # -- temperature, multipliers, targets -----------------------------------

    def update_temperature(self, log_probs: np.ndarray) -> float:
        """Gradient step on log alpha toward the entropy target.

        L(alpha) = E[-alpha * (H_target + log pi)]; the log-space gradient is
        -alpha * mean(H_target + log pi).
        """
        gap = float(np.mean(np.asarray(log_probs) + self.p.h_target))
        grad = -self.alpha * gap
        self.log_alpha = self.alpha_adam.step(self.log_alpha, grad)
        return self.alpha

    def update_multipliers(self, costs: np.ndarray) -> np.ndarray:
        """Projected dual ascent: lambda_i <- max(0, lambda_i + eta*(E[c_i] - d_i))."""
        mean_costs = np.mean(np.atleast_2d(np.asarray(costs, dtype=float)), axis=0)
        self.lambdas = np.maximum(
            0.0, self.lambdas + self.p.eta_lambda * (mean_costs - self.cost_thresholds))
        return self.lambdas.copy()

    def soft_update_targets(self, tau: float | None = None) -> None:
        if tau is None:
            tau = self.p.tau
        for net, tgt in ((self.q1, self.q1_target), (self.q2, self.q2_target)):
            for p, pt in zip(net.weights + net.biases, tgt.weights + tgt.biases):
                pt *= 1.0 - tau
                pt += tau * p

    # -- one full cycle ------------------------------------------------------

    def update(self, states, actions, rewards, costs, next_states, dones,
               rng: np.random.Generator) -> dict:
        """Critics, actor, temperature, multipliers, target smoothing, in order."""
        l1, l2 = self.update_critics(states, actions, rewards, costs,
                                     next_states, dones, rng)
        actor_loss, log_prob = self.update_actor(states, rng)
        alpha = self.update_temperature(log_prob)
        lambdas = self.update_multipliers(costs)
        self.soft_update_targets()
        return {"critic1_loss": l1, "critic2_loss": l2, "actor_loss": actor_loss,
                "alpha": alpha, "lambdas": lambdas}
