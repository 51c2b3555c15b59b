"""From-scratch DQN core: MLP Q-function, replay buffer, TD loss, target sync.

The optimizer is plain stochastic gradient descent so the single published
learning rate (0.1) keeps its meaning; gradients come from exact
backpropagation and are cross-checked against central finite differences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .entanglement import ContractViolation

CHECKPOINT_VERSION = 1


@dataclass
class Mlp:
    """Feed-forward Q-network: rectifier hidden layers, identity output."""

    dims: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def clone(self) -> "Mlp":
        return Mlp(self.dims, [w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def n_params(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)


# A target network is a delayed parameter snapshot of the main net.
TargetNet = Mlp


@dataclass(frozen=True)
class Transition:
    s: np.ndarray
    a: int
    r: float
    s_next: np.ndarray
    done: bool
    mask_next: np.ndarray


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.1
    batch: int = 512
    discount: float = 0.9
    target_sync_period: int = 100
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_steps: int = 10_000
    buffer_capacity: int = 10_000
    episodes: int = 2000
    hidden: tuple[int, ...] = (128, 128)
    train_every: int = 1
    max_grad_steps: int | None = None

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError(f"lr must be > 0, got {self.lr}")
        if not (0.0 <= self.discount <= 1.0):
            raise ValueError(f"discount must lie in [0, 1], got {self.discount}")
        if self.target_sync_period < 1:
            raise ValueError(f"target_sync_period must be >= 1, got {self.target_sync_period}")
        if self.batch < 1:
            raise ValueError(f"batch must be >= 1, got {self.batch}")

    def epsilon_at(self, step: int) -> float:
        if self.epsilon_decay_steps <= 0 or step >= self.epsilon_decay_steps:
            return self.epsilon_end
        frac = step / self.epsilon_decay_steps
        return self.epsilon_start + frac * (self.epsilon_end - self.epsilon_start)


class ReplayBuffer:
    """Ring buffer of transitions with uniform without-replacement batches."""

    def __init__(self, capacity: int, rng: np.random.Generator):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._rng = rng
        self._items: list[Transition] = []
        self._cursor = 0

    def __len__(self) -> int:
        return len(self._items)

    def push(self, transition: Transition) -> None:
        if len(self._items) < self.capacity:
            self._items.append(transition)
        else:
            self._items[self._cursor] = transition
        self._cursor = (self._cursor + 1) % self.capacity

    def sample(self, batch: int) -> list[Transition]:
        idx = self._rng.choice(len(self._items), size=batch, replace=False)
        return [self._items[int(i)] for i in idx]


def mlp_init(dims, seed: int) -> Mlp:
    """Zero-mean uniform weights scaled by 1/sqrt(fan_in); zero biases."""
    dims = tuple(int(d) for d in dims)
    if len(dims) < 2:
        raise ValueError(f"dims needs input and output sizes, got {dims}")
    if any(d < 1 for d in dims):
        raise ValueError(f"all layer sizes must be >= 1, got {dims}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims, dims[1:]):
        scale = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-scale, scale, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return Mlp(dims, weights, biases)


def forward(mlp: Mlp, x: np.ndarray) -> np.ndarray:
    """Q-values for one state vector (1-d) or a batch (2-d)."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    h = x[None, :] if single else x
    if h.shape[1] != mlp.dims[0]:
        raise ValueError(f"input dimension {h.shape[1]} != network input {mlp.dims[0]}")
    last = len(mlp.weights) - 1
    for i, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        h = h @ w + b
        if i != last:
            h = np.maximum(h, 0.0)
    return h[0] if single else h


def _forward_cached(mlp: Mlp, x: np.ndarray):
    """Batch forward keeping post-activation layer inputs for backprop."""
    activations = [x]
    last = len(mlp.weights) - 1
    h = x
    for i, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        h = h @ w + b
        if i != last:
            h = np.maximum(h, 0.0)
        activations.append(h)
    return activations


def _mse_loss_and_grads(mlp: Mlp, states: np.ndarray, actions: np.ndarray, targets: np.ndarray):
    """Mean squared TD error over chosen actions and its exact parameter gradients."""
    n = states.shape[0]
    activations = _forward_cached(mlp, states)
    q = activations[-1]
    rows = np.arange(n)
    err = q[rows, actions] - targets
    loss = float(np.mean(err ** 2))
    delta = np.zeros_like(q)
    delta[rows, actions] = 2.0 * err / n
    grad_w = [None] * len(mlp.weights)
    grad_b = [None] * len(mlp.biases)
    for i in range(len(mlp.weights) - 1, -1, -1):
        grad_w[i] = activations[i].T @ delta
        grad_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ mlp.weights[i].T) * (activations[i] > 0)
    return loss, grad_w, grad_b


def td_target(batch: list[Transition], target: TargetNet, discount: float) -> np.ndarray:
    """Bootstrap targets y = r (terminal) or r + discount * max over valid a' of Q_target."""
    if not batch:
        raise ValueError("batch must be non-empty")
    targets = np.empty(len(batch))
    bootstrap = [i for i, t in enumerate(batch) if not t.done]
    for i, t in enumerate(batch):
        targets[i] = t.r
    if bootstrap:
        next_states = np.stack([batch[i].s_next for i in bootstrap])
        q_next = forward(target, next_states)
        for row, i in enumerate(bootstrap):
            mask = np.asarray(batch[i].mask_next, dtype=bool).ravel()
            if not mask.any():
                raise ContractViolation(
                    "non-terminal transition with all-false next mask; episodes must terminate"
                )
            targets[i] += discount * float(q_next[row][mask].max())
    return targets


def train_step(mlp: Mlp, target: TargetNet, buffer: ReplayBuffer,
               cfg: TrainConfig) -> float | None:
    """One SGD step on the TD loss; returns the pre-update loss, or None if not ready."""
    if len(buffer) < cfg.batch:
        return None
    batch = buffer.sample(cfg.batch)
    states = np.stack([t.s for t in batch])
    actions = np.asarray([t.a for t in batch], dtype=np.intp)
    targets = td_target(batch, target, cfg.discount)
    loss, grad_w, grad_b = _mse_loss_and_grads(mlp, states, actions, targets)
    for w, gw in zip(mlp.weights, grad_w):
        w -= cfg.lr * gw
    for b, gb in zip(mlp.biases, grad_b):
        b -= cfg.lr * gb
    return loss


def sync_target(mlp: Mlp, target: TargetNet) -> None:
    """Copy main parameters into the target network in place."""
    for tw, w in zip(target.weights, mlp.weights):
        tw[...] = w
    for tb, b in zip(target.biases, mlp.biases):
        tb[...] = b


def grad_check(mlp: Mlp, x: np.ndarray, a: int, y: float, eps: float) -> float:
    """Max relative error of backprop vs central finite differences.

    The loss checked is the squared error (Q(x)[a] - y)^2 on a single sample;
    components where both gradients are below 1e-8 in magnitude count as 0.
    """
    if not (1e-7 <= eps <= 1e-3):
        raise ValueError(f"eps must lie in [1e-7, 1e-3], got {eps}")
    x = np.asarray(x, dtype=np.float64)
    states = x[None, :]
    actions = np.asarray([a], dtype=np.intp)
    targets = np.asarray([y], dtype=np.float64)
    _, grad_w, grad_b = _mse_loss_and_grads(mlp, states, actions, targets)

    def loss_now() -> float:
        return float((forward(mlp, x)[a] - y) ** 2)

    max_rel = 0.0
    params = list(zip(mlp.weights, grad_w)) + list(zip(mlp.biases, grad_b))
    for array, grad in params:
        flat = array.ravel()
        gflat = grad.ravel()
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + eps
            hi = loss_now()
            flat[j] = orig - eps
            lo = loss_now()
            flat[j] = orig
            fd = (hi - lo) / (2.0 * eps)
            scale = max(abs(fd), abs(gflat[j]))
            if scale < 1e-8:
                continue
            max_rel = max(max_rel, abs(fd - gflat[j]) / scale)
    return max_rel


def assert_finite(mlp: Mlp) -> None:
    for arr in (*mlp.weights, *mlp.biases):
        if not np.all(np.isfinite(arr)):
            raise FloatingPointError("network parameters diverged to NaN/Inf")


def save_checkpoint(mlp: Mlp, path: str | Path, global_step: int = 0) -> None:
    """Versioned JSON parameter dump; floats round-trip exactly via repr."""
    doc = {
        "format_version": CHECKPOINT_VERSION,
        "dims": list(mlp.dims),
        "weights": [w.tolist() for w in mlp.weights],
        "biases": [b.tolist() for b in mlp.biases],
        "global_step": global_step,
    }
    Path(path).write_text(json.dumps(doc))


def load_checkpoint(path: str | Path) -> tuple[Mlp, int]:
    doc = json.loads(Path(path).read_text())
    if doc.get("format_version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {doc.get('format_version')}")
    dims = tuple(doc["dims"])
    weights = [np.asarray(w, dtype=np.float64) for w in doc["weights"]]
    biases = [np.asarray(b, dtype=np.float64) for b in doc["biases"]]
    mlp = Mlp(dims, weights, biases)
    for w, (fan_in, fan_out) in zip(weights, zip(dims, dims[1:])):
        if w.shape != (fan_in, fan_out):
            raise ValueError("checkpoint weight shapes do not match dims")
    return mlp, int(doc["global_step"])
