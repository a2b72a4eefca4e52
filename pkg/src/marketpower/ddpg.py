"""Deep deterministic policy gradient on top of :mod:`marketpower.nn`.

Actor and critic are small MLPs trained with explicit gradients. The critic
regresses on bootstrapped targets from slowly tracking target copies; the actor
follows the critic's action gradient through the chain rule.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from typing import NamedTuple

import numpy as np

from marketpower.nn import Mlp, make_optimizer

CHECKPOINT_FORMAT = "marketpower-ddpg"
CHECKPOINT_VERSION = 1


class BufferNotReady(RuntimeError):
    """The replay buffer holds fewer transitions than requested."""


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: np.ndarray
    reward: float
    next_state: np.ndarray
    terminal: bool = False


class Batch(NamedTuple):
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    terminals: np.ndarray


class ReplayBuffer:
    """Bounded FIFO of transitions backed by ring arrays.

    Once ``capacity`` items are stored each push overwrites the oldest one.
    """

    def __init__(self, capacity: int = 50_000):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.count = 0
        self._next = 0
        self._arrays = None

    def __len__(self):
        return self.count

    def _allocate(self, state_dim, action_dim):
        c = self.capacity
        self._arrays = Batch(
            np.zeros((c, state_dim)), np.zeros((c, action_dim)), np.zeros(c),
            np.zeros((c, state_dim)), np.zeros(c, dtype=bool),
        )

    def push(self, transition: Transition) -> None:
        s = np.atleast_1d(np.asarray(transition.state, dtype=float))
        s2 = np.atleast_1d(np.asarray(transition.next_state, dtype=float))
        a = np.atleast_1d(np.asarray(transition.action, dtype=float))
        if s.shape != s2.shape:
            raise ValueError("state and next_state must have the same dimension")
        if not np.isfinite(transition.reward):
            raise ValueError("reward must be finite")
        if self._arrays is None:
            self._allocate(s.size, a.size)
        i = self._next
        self._arrays.states[i] = s
        self._arrays.actions[i] = a
        self._arrays.rewards[i] = transition.reward
        self._arrays.next_states[i] = s2
        self._arrays.terminals[i] = transition.terminal
        self._next = (i + 1) % self.capacity
        self.count = min(self.count + 1, self.capacity)

    def _order(self):
        if self.count < self.capacity:
            return np.arange(self.count)
        return (np.arange(self.capacity) + self._next) % self.capacity

    def _take(self, idx) -> Batch:
        return Batch(*(arr[idx] for arr in self._arrays))

    def transitions(self) -> list[Transition]:
        """Stored transitions, oldest first."""
        b = self._take(self._order())
        return [Transition(b.states[k], b.actions[k], float(b.rewards[k]), b.next_states[k],
                           bool(b.terminals[k])) for k in range(self.count)]

    def sample_indices(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if n <= 0 or self.count < n:
            raise BufferNotReady(f"need {n} transitions, buffer holds {self.count}")
        return rng.integers(0, self.count, size=n)

    def sample(self, n: int, rng: np.random.Generator) -> Batch:
        """Uniform minibatch, drawn with replacement."""
        return self._take(self.sample_indices(n, rng))


@dataclass
class OUNoise:
    """Ornstein-Uhlenbeck process mean-reverting to zero."""

    theta: float = 0.15
    sigma: float = 0.2
    x: np.ndarray = field(default_factory=lambda: np.zeros(1))

    def __post_init__(self):
        if self.theta < 0 or self.sigma < 0:
            raise ValueError("theta and sigma must be non-negative")
        self.x = np.atleast_1d(np.asarray(self.x, dtype=float)).copy()

    def reset(self):
        self.x = np.zeros_like(self.x)

    def step(self, rng: np.random.Generator) -> np.ndarray:
        self.x = self.x + self.theta * (0.0 - self.x) + self.sigma * rng.standard_normal(self.x.shape)
        return self.x


def ou_step(x, theta, sigma, rng):
    if theta < 0 or sigma < 0:
        raise ValueError("theta and sigma must be non-negative")
    return x + theta * (0.0 - x) + sigma * rng.standard_normal(np.shape(x))


@dataclass
class DdpgConfig:
    state_dim: int = 6
    action_dim: int = 1
    hidden_sizes: tuple[int, ...] = (64, 64)
    hidden_activation: str = "relu"
    gamma: float = 0.99
    tau: float = 0.005
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    batch_size: int = 64
    buffer_capacity: int = 50_000
    optimizer: str = "sgd"
    ou_theta: float = 0.15
    ou_sigma: float = 0.2
    ou_sigma_final: float = 0.02

    def __post_init__(self):
        self.hidden_sizes = tuple(int(h) for h in self.hidden_sizes)
        if not 0 <= self.gamma <= 1:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if not 0 < self.tau <= 1:
            raise ValueError(f"tau must be in (0, 1], got {self.tau}")
        if self.actor_lr <= 0 or self.critic_lr <= 0:
            raise ValueError("learning rates must be positive")
        if self.batch_size <= 0 or self.buffer_capacity <= 0:
            raise ValueError("batch_size and buffer_capacity must be positive")

    @classmethod
    def from_dict(cls, d: dict | None) -> "DdpgConfig":
        d = dict(d or {})
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ValueError(f"unknown rl_hyperparameters: {', '.join(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden_sizes"] = list(self.hidden_sizes)
        return d


class DdpgAgent:
    def __init__(self, config: DdpgConfig, actor: Mlp, critic: Mlp,
                 target_actor: Mlp | None = None, target_critic: Mlp | None = None):
        if actor.output_activation != "tanh":
            raise ValueError("the actor needs a tanh output to keep actions in [-1, 1]")
        if critic.layer_sizes[0] != actor.layer_sizes[0] + actor.layer_sizes[-1] or critic.layer_sizes[-1] != 1:
            raise ValueError("critic must map state+action to a scalar")
        self.config = config
        self.actor = actor
        self.critic = critic
        self.target_actor = target_actor if target_actor is not None else actor.copy()
        self.target_critic = target_critic if target_critic is not None else critic.copy()
        if not (self.target_actor.same_architecture(actor) and self.target_critic.same_architecture(critic)):
            raise ValueError("target networks must match their online networks")
        self.actor_opt = make_optimizer(config.optimizer, config.actor_lr)
        self.critic_opt = make_optimizer(config.optimizer, config.critic_lr)
        self.noise = OUNoise(config.ou_theta, config.ou_sigma, np.zeros(config.action_dim))

    @classmethod
    def create(cls, config: DdpgConfig, rng: np.random.Generator, zero_actor=False) -> "DdpgAgent":
        sizes = tuple(config.hidden_sizes)
        actor = Mlp.create((config.state_dim, *sizes, config.action_dim), rng,
                           config.hidden_activation, "tanh", zero=zero_actor)
        critic = Mlp.create((config.state_dim + config.action_dim, *sizes, 1), rng,
                            config.hidden_activation, "identity")
        return cls(config, actor, critic)

    def act(self, state) -> np.ndarray:
        return self.actor.forward(np.asarray(state, dtype=float))

    def select_action(self, state, explore: bool, rng: np.random.Generator | None = None) -> np.ndarray:
        a = self.act(state)
        if not explore:
            return a
        return np.clip(a + self.noise.step(rng), -1.0, 1.0)

    def set_noise_scale(self, progress: float) -> None:
        """Linearly anneal sigma from its start to its final value over ``progress`` in [0, 1]."""
        p = min(max(progress, 0.0), 1.0)
        c = self.config
        self.noise.sigma = c.ou_sigma + (c.ou_sigma_final - c.ou_sigma) * p

    # checkpointing -------------------------------------------------------

    def state_dict(self) -> dict:
        def net(m):
            return {
                "layer_sizes": list(m.layer_sizes),
                "hidden_activation": m.hidden_activation,
                "output_activation": m.output_activation,
                "weights": [w.tolist() for w in m.weights],
                "biases": [b.tolist() for b in m.biases],
            }

        def opt(o):
            st = o.state()
            for key in ("m", "v"):
                if st.get(key) is not None:
                    st[key] = [x.tolist() for x in st[key]]
            return st

        return {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "config": self.config.to_dict(),
            "networks": {
                "actor": net(self.actor), "critic": net(self.critic),
                "target_actor": net(self.target_actor), "target_critic": net(self.target_critic),
            },
            "optimizers": {"actor": opt(self.actor_opt), "critic": opt(self.critic_opt)},
            "noise": {"theta": self.noise.theta, "sigma": self.noise.sigma, "x": self.noise.x.tolist()},
        }

    @classmethod
    def from_state_dict(cls, d: dict) -> "DdpgAgent":
        if d.get("format") != CHECKPOINT_FORMAT or d.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint {d.get('format')!r} v{d.get('version')!r}")

        def net(n):
            return Mlp(tuple(n["layer_sizes"]), [np.array(w, dtype=float) for w in n["weights"]],
                       [np.array(b, dtype=float) for b in n["biases"]],
                       n["hidden_activation"], n["output_activation"])

        nets = d["networks"]
        agent = cls(DdpgConfig.from_dict(d["config"]), net(nets["actor"]), net(nets["critic"]),
                    net(nets["target_actor"]), net(nets["target_critic"]))
        for name, o, params in (("actor", agent.actor_opt, agent.actor.params),
                                ("critic", agent.critic_opt, agent.critic.params)):
            st = d["optimizers"][name]
            if st["kind"] != o.kind:
                raise ValueError(f"{name} optimizer kind {st['kind']!r} does not match config")
            o.load_state(st, params)
        nz = d["noise"]
        agent.noise = OUNoise(nz["theta"], nz["sigma"], np.array(nz["x"], dtype=float))
        return agent

    def dumps(self) -> str:
        return json.dumps(self.state_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def loads(cls, text: str) -> "DdpgAgent":
        return cls.from_state_dict(json.loads(text))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path) -> "DdpgAgent":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())


def td_targets(agent: DdpgAgent, batch: Batch) -> np.ndarray:
    """y = r + gamma * Q'(s', mu'(s')), with no bootstrap past a terminal transition."""
    next_actions = agent.target_actor.forward(batch.next_states)
    q_next = agent.target_critic.forward(np.hstack([batch.next_states, next_actions]))[:, 0]
    return batch.rewards + agent.config.gamma * (~batch.terminals) * q_next


def critic_loss_and_grads(agent: DdpgAgent, batch: Batch, targets: np.ndarray):
    """Mean squared TD error and its gradient w.r.t. the critic parameters."""
    n = len(targets)
    q, cache = agent.critic.forward_cache(np.hstack([batch.states, batch.actions]))
    err = q[:, 0] - targets
    loss = float(np.mean(err ** 2))
    grads, _ = agent.critic.backward(cache, (2.0 / n) * err[:, None])
    return loss, grads


def actor_objective_and_grads(agent: DdpgAgent, states: np.ndarray):
    """Mean critic value of the actor's own actions and its gradient w.r.t. the actor.

    The gradient is that of the objective itself (ascent direction).
    """
    n = states.shape[0]
    actions, a_cache = agent.actor.forward_cache(states)
    q, c_cache = agent.critic.forward_cache(np.hstack([states, actions]))
    _, dq_dinput = agent.critic.backward(c_cache, np.full((n, 1), 1.0 / n))
    dq_da = dq_dinput[:, agent.config.state_dim:]
    grads, _ = agent.actor.backward(a_cache, dq_da)
    return float(np.mean(q)), grads


def soft_update(target: Mlp, online: Mlp, tau: float) -> Mlp:
    """theta' <- tau * theta + (1 - tau) * theta', in place."""
    if not target.same_architecture(online):
        raise ValueError("soft update needs identical architectures")
    if not 0 < tau <= 1:
        raise ValueError(f"tau must be in (0, 1], got {tau}")
    for t, o in zip(target.params, online.params):
        t[...] = tau * o + (1.0 - tau) * t
    return target


def train_step(agent: DdpgAgent, buffer: ReplayBuffer, rng: np.random.Generator):
    """One minibatch update of critic, actor and both targets.

    Returns ``(critic_loss, actor_objective)`` measured before the update.
    Raises :class:`BufferNotReady` while the buffer holds fewer than
    ``batch_size`` transitions.
    """
    batch = buffer.sample(agent.config.batch_size, rng)
    y = td_targets(agent, batch)
    loss, c_grads = critic_loss_and_grads(agent, batch, y)
    agent.critic_opt.step(agent.critic.params, c_grads)

    objective, a_grads = actor_objective_and_grads(agent, batch.states)
    agent.actor_opt.step(agent.actor.params, [-g for g in a_grads])

    soft_update(agent.target_critic, agent.critic, agent.config.tau)
    soft_update(agent.target_actor, agent.actor, agent.config.tau)
    return loss, objective


class TabularQ:
    """Lookup-table Q-learning; kept as a reference learner for tests."""

    def __init__(self, n_states: int, n_actions: int, alpha: float, gamma: float):
        if not 0 <= alpha <= 1:
            raise ValueError("alpha must be in [0, 1]")
        self.q = np.zeros((n_states, n_actions))
        self.alpha = alpha
        self.gamma = gamma

    def update(self, s, a, r, s_next, terminal=False):
        bootstrap = 0.0 if terminal else self.gamma * self.q[s_next].max()
        delta = r + bootstrap - self.q[s, a]
        self.q[s, a] += self.alpha * delta
        return delta

    def greedy_policy(self) -> np.ndarray:
        return self.q.argmax(axis=1)


def tabular_q_update(table: TabularQ, s, a, r, s_next, terminal=False) -> TabularQ:
    table.update(s, a, r, s_next, terminal)
    return table
