"""Small feed-forward networks with hand-written backpropagation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ACTIVATIONS = ("relu", "tanh", "identity")


def _act(name, z):
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    return z


def _act_grad(name, z, a):
    # derivative of the activation, expressed through pre- (z) or post-activation (a)
    if name == "relu":
        return (z > 0).astype(z.dtype)
    if name == "tanh":
        return 1.0 - a * a
    return np.ones_like(z)


@dataclass
class Mlp:
    """Fully connected network; ``weights[k]`` has shape (fan_in, fan_out)."""

    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    hidden_activation: str = "relu"
    output_activation: str = "identity"

    def __post_init__(self):
        self.layer_sizes = tuple(int(n) for n in self.layer_sizes)
        if len(self.layer_sizes) < 2:
            raise ValueError("an Mlp needs at least an input and an output layer")
        if self.hidden_activation not in ("relu", "tanh"):
            raise ValueError(f"unknown hidden activation {self.hidden_activation!r}")
        if self.output_activation not in ("identity", "tanh"):
            raise ValueError(f"unknown output activation {self.output_activation!r}")
        if len(self.weights) != len(self.layer_sizes) - 1 or len(self.biases) != len(self.weights):
            raise ValueError("one weight matrix and bias vector per layer transition")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            shape = (self.layer_sizes[k], self.layer_sizes[k + 1])
            if w.shape != shape or b.shape != (shape[1],):
                raise ValueError(f"layer {k}: expected weight {shape} and bias ({shape[1]},)")

    @classmethod
    def create(cls, layer_sizes, rng=None, hidden_activation="relu",
               output_activation="identity", zero=False) -> "Mlp":
        """Uniform ±1/sqrt(fan_in) initialization, or all zeros."""
        weights, biases = [], []
        for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            if zero:
                weights.append(np.zeros((fan_in, fan_out)))
                biases.append(np.zeros(fan_out))
            else:
                bound = 1.0 / np.sqrt(fan_in)
                weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
                biases.append(rng.uniform(-bound, bound, size=fan_out))
        return cls(tuple(layer_sizes), weights, biases, hidden_activation, output_activation)

    @property
    def params(self) -> list[np.ndarray]:
        """Parameters in a fixed order: w0, b0, w1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def copy(self) -> "Mlp":
        return Mlp(self.layer_sizes, [w.copy() for w in self.weights],
                   [b.copy() for b in self.biases], self.hidden_activation, self.output_activation)

    def same_architecture(self, other: "Mlp") -> bool:
        return (self.layer_sizes == other.layer_sizes
                and self.hidden_activation == other.hidden_activation
                and self.output_activation == other.output_activation)

    def forward_cache(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.layer_sizes[0]:
            raise ValueError(f"input has {x.shape[-1]} features, network expects {self.layer_sizes[0]}")
        pre, post = [], [x]
        a = x
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w + b
            a = _act(self.output_activation if k == last else self.hidden_activation, z)
            pre.append(z)
            post.append(a)
        return a, (pre, post)

    def forward(self, x):
        return self.forward_cache(x)[0]

    def backward(self, cache, upstream):
        """Gradients of ``sum(upstream * output)``.

        Returns ``(param_grads, input_grad)`` with ``param_grads`` ordered like
        :attr:`params`. Batched inputs accumulate over the leading axis.
        """
        pre, post = cache
        delta = np.asarray(upstream, dtype=float)
        last = len(self.weights) - 1
        grads = [None] * (2 * len(self.weights))
        for k in range(last, -1, -1):
            name = self.output_activation if k == last else self.hidden_activation
            delta = delta * _act_grad(name, pre[k], post[k + 1])
            a_in = post[k]
            if a_in.ndim == 1:
                grads[2 * k] = np.outer(a_in, delta)
                grads[2 * k + 1] = delta.copy()
            else:
                grads[2 * k] = a_in.T @ delta
                grads[2 * k + 1] = delta.sum(axis=0)
            delta = delta @ self.weights[k].T
        return grads, delta


def forward(net: Mlp, x):
    return net.forward(x)


def backward(net: Mlp, x, upstream):
    _, cache = net.forward_cache(x)
    return net.backward(cache, upstream)


class Sgd:
    """Plain gradient descent; ``step`` subtracts ``lr * grad`` in place."""

    kind = "sgd"

    def __init__(self, lr: float):
        if lr <= 0:
            raise ValueError("learning rate must be positive")
        self.lr = lr

    def step(self, params, grads):
        for p, g in zip(params, grads):
            p -= self.lr * g

    def state(self) -> dict:
        return {"kind": self.kind, "lr": self.lr}

    def load_state(self, state, params):
        self.lr = state["lr"]


class Adam:
    kind = "adam"

    def __init__(self, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        if lr <= 0:
            raise ValueError("learning rate must be positive")
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = None
        self.v = None

    def step(self, params, grads):
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        c1 = 1 - self.beta1 ** self.t
        c2 = 1 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def state(self) -> dict:
        return {
            "kind": self.kind, "lr": self.lr, "beta1": self.beta1, "beta2": self.beta2,
            "eps": self.eps, "t": self.t,
            "m": None if self.m is None else [x.copy() for x in self.m],
            "v": None if self.v is None else [x.copy() for x in self.v],
        }

    def load_state(self, state, params):
        self.lr, self.beta1, self.beta2, self.eps = state["lr"], state["beta1"], state["beta2"], state["eps"]
        self.t = state["t"]
        self.m = None if state["m"] is None else [np.array(x, dtype=float) for x in state["m"]]
        self.v = None if state["v"] is None else [np.array(x, dtype=float) for x in state["v"]]


def make_optimizer(kind: str, lr: float):
    if kind == "sgd":
        return Sgd(lr)
    if kind == "adam":
        return Adam(lr)
    raise ValueError(f"unknown optimizer {kind!r}")
