"""Self-contained fully connected network with explicit backprop and Adam.

Four-layer topology (input -> 128 -> 64 -> output by default) with ReLU hidden
activations and a linear output head. Parameters live in plain float64 numpy
arrays so training is bit-reproducible and checkpoints round-trip exactly.
"""

from __future__ import annotations

import numpy as np

from .errors import TrainingDivergence


def glorot_uniform(fan_in: int, fan_out: int, rng: np.random.Generator) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class Mlp:
    """Weights as a list of (fan_in, fan_out) matrices plus bias rows."""

    def __init__(self, sizes: list[int], rng: np.random.Generator | None = None):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.sizes = list(sizes)
        if rng is None:
            self.weights = [np.zeros((a, b)) for a, b in zip(sizes, sizes[1:])]
        else:
            self.weights = [glorot_uniform(a, b, rng) for a, b in zip(sizes, sizes[1:])]
        self.biases = [np.zeros(b) for b in sizes[1:]]

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def forward(self, x: np.ndarray):
        """Returns (output, cache); accepts a single vector or a batch."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        h = x[None, :] if single else x
        if h.shape[1] != self.sizes[0]:
            raise ValueError(f"input width {h.shape[1]} != {self.sizes[0]}")
        pre = []
        acts = [h]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            pre.append(z)
            h = np.maximum(z, 0.0) if i < self.n_layers - 1 else z
            acts.append(h)
        out = h[0] if single else h
        return out, (acts, pre, single)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)[0]

    def backward(self, cache, grad_out: np.ndarray):
        """Backpropagate d(loss)/d(output); returns (param grads, input grad).

        Parameter gradients are summed over the batch, matching a loss that
        the caller has already scaled (e.g. by 1/batch for a mean).
        """
        acts, pre, single = cache
        g = np.asarray(grad_out, dtype=float)
        if single:
            g = g[None, :]
        gw = [None] * self.n_layers
        gb = [None] * self.n_layers
        delta = g
        for i in range(self.n_layers - 1, -1, -1):
            if i < self.n_layers - 1:
                delta = delta * (pre[i] > 0.0)
            gw[i] = acts[i].T @ delta
            gb[i] = delta.sum(axis=0)
            delta = delta @ self.weights[i].T
        grad_in = delta[0] if single else delta
        return (gw, gb), grad_in

    def copy(self) -> "Mlp":
        out = Mlp(self.sizes)
        out.weights = [w.copy() for w in self.weights]
        out.biases = [b.copy() for b in self.biases]
        return out

    def copy_from(self, other: "Mlp") -> None:
        for mine, theirs in zip(self.weights + self.biases,
                                other.weights + other.biases):
            if mine.shape != theirs.shape:
                raise ValueError("architecture mismatch")
            mine[...] = theirs


class Adam:
    """Bias-corrected Adam over an Mlp's parameter list."""

    def __init__(self, net: Mlp, lr: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in net.weights + net.biases]
        self.v = [np.zeros_like(p) for p in net.weights + net.biases]

    def step(self, net: Mlp, grads) -> None:
        gw, gb = grads
        flat = list(gw) + list(gb)
        params = net.weights + net.biases
        if len(flat) != len(params):
            raise ValueError("gradient/parameter count mismatch")
        for g in flat:
            if not np.all(np.isfinite(g)):
                raise TrainingDivergence("non-finite gradient in Adam step")
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, flat, self.m, self.v):
            if p.shape != g.shape:
                raise ValueError(f"gradient shape {g.shape} != parameter {p.shape}")
            m[...] = self.beta1 * m + (1.0 - self.beta1) * g
            v[...] = self.beta2 * v + (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class ScalarAdam:
    """Adam for a single scalar (used for the entropy temperature)."""

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = 0.0
        self.v = 0.0

    def step(self, value: float, grad: float) -> float:
        if not np.isfinite(grad):
            raise TrainingDivergence("non-finite scalar gradient")
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad
        mhat = self.m / (1.0 - self.beta1 ** self.t)
        vhat = self.v / (1.0 - self.beta2 ** self.t)
        return value - self.lr * mhat / (np.sqrt(vhat) + self.eps)
