"""Losses, optimizers and the full-batch experiment loop.

The classical pipeline trains tensor networks with Adam on exact
environment gradients; quantum pipelines use SPSA, which probes the loss at
two randomly perturbed points per step and never needs circuit gradients.
All runs are deterministic given the config seed (with the exact backend,
bit-for-bit).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .params import ParameterStore
from .pipeline import CompiledModel, PipelineConfig, predict_p1, \
    prediction_gradient, shot_seed

CLAMP = 1e-9


def bce_loss(p1: float, y: int) -> float:
    """Binary cross entropy with probability clamping."""
    p = min(max(p1, CLAMP), 1.0 - CLAMP)
    return -(y * np.log(p) + (1 - y) * np.log(1.0 - p))


def bce_grad(p1: float, y: int) -> float:
    p = min(max(p1, CLAMP), 1.0 - CLAMP)
    return -y / p + (1 - y) / (1.0 - p)


def accuracy(p1s, labels) -> float:
    hits = sum((p >= 0.5) == bool(y) for p, y in zip(p1s, labels))
    return hits / len(labels)


# ---------------------------------------------------------------------------
# Optimizers.
# ---------------------------------------------------------------------------


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n: int) -> "AdamState":
        return cls(np.zeros(n), np.zeros(n))


def adam_step(params: np.ndarray, grad: np.ndarray, state: AdamState,
              lr: float = 0.05, beta1: float = 0.9, beta2: float = 0.999,
              epsilon: float = 1e-8) -> tuple[np.ndarray, AdamState]:
    """One Adam update with bias correction."""
    t = state.t + 1
    m = beta1 * state.m + (1 - beta1) * grad
    v = beta2 * state.v + (1 - beta2) * grad ** 2
    m_hat = m / (1 - beta1 ** t)
    v_hat = v / (1 - beta2 ** t)
    new = params - lr * m_hat / (np.sqrt(v_hat) + epsilon)
    return new, AdamState(m, v, t)


def spsa_step(params: np.ndarray, loss_fn: Callable[[np.ndarray], float],
              k: int, a: float = 0.05, c: float = 0.06, big_a: float = 0.0,
              alpha: float = 0.602, gamma: float = 0.101,
              rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """One SPSA update: two loss evaluations along a random direction."""
    rng = rng if rng is not None else np.random.default_rng(k)
    delta = rng.choice((-1.0, 1.0), size=params.shape)
    ck = c / (k + 1) ** gamma
    ak = a / (big_a + k + 1) ** alpha
    plus = loss_fn(params + ck * delta)
    minus = loss_fn(params - ck * delta)
    gradient = (plus - minus) / (2.0 * ck) / delta
    return params - ak * gradient


# ---------------------------------------------------------------------------
# Experiment loop.
# ---------------------------------------------------------------------------


@dataclass
class TrainHistory:
    rows: list[tuple[int, float, float, float, float]] = field(
        default_factory=list)

    def append(self, iteration, train_loss, train_acc, dev_loss, dev_acc):
        self.rows.append((iteration, float(train_loss), float(train_acc),
                          float(dev_loss), float(dev_acc)))

    def column(self, name: str) -> list[float]:
        idx = ("iter", "train_loss", "train_acc", "dev_loss", "dev_acc"
               ).index(name)
        return [row[idx] for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["iter", "train_loss", "train_acc", "dev_loss",
                         "dev_acc"])
        writer.writerows(self.rows)
        return buf.getvalue()

    def __len__(self) -> int:
        return len(self.rows)


def iterations_to_reach(history: TrainHistory, threshold: float,
                        column: str = "dev_acc") -> Optional[int]:
    """First iteration whose metric is at or above the threshold."""
    for it, value in zip(history.column("iter"), history.column(column)):
        if value >= threshold:
            return int(it)
    return None


def _batch_p1(model: CompiledModel, store: ParameterStore, indices,
              iteration: int, slot: int) -> list[float]:
    cfg = model.config
    out = []
    for i in indices:
        seed = (shot_seed(cfg.seed, iteration, slot, i)
                if cfg.backend == "shots" else None)
        out.append(predict_p1(model, store, i, seed))
    return out


def _mean_loss(p1s, labels) -> float:
    return float(np.mean([bce_loss(p, y) for p, y in zip(p1s, labels)]))


def train(model: CompiledModel) -> tuple[ParameterStore, TrainHistory]:
    """Full-batch training; returns the final store and the history."""
    cfg = model.config
    ds = model.dataset
    train_idx, train_y = ds.train, ds.labels("train")
    dev_idx, dev_y = ds.dev, ds.labels("dev")
    store = model.store
    history = TrainHistory()
    if cfg.iterations == 0:
        return store, history

    vec = store.to_vector()
    adam_state = AdamState.zeros(len(vec))
    spsa_rng = np.random.default_rng(cfg.seed)
    big_a = (cfg.spsa_big_a if cfg.spsa_big_a is not None
             else 0.1 * cfg.iterations)

    for it in range(cfg.iterations):
        if cfg.optimizer == "adam":
            current = store.from_vector(vec)
            grad = np.zeros_like(vec)
            for i, y in zip(train_idx, train_y):
                p1 = predict_p1(model, current, i)
                grad += prediction_gradient(model, current, i,
                                            bce_grad(p1, y))
            grad /= len(train_idx)
            vec, adam_state = adam_step(
                vec, grad, adam_state, cfg.learning_rate, cfg.beta1,
                cfg.beta2, cfg.epsilon)
        else:
            def loss_at(theta: np.ndarray, _it=it) -> float:
                probe = store.from_vector(theta)
                p1s = _batch_p1(model, probe, train_idx, _it, slot=0)
                return _mean_loss(p1s, train_y)

            vec = spsa_step(vec, loss_at, it, cfg.spsa_a, cfg.spsa_c,
                            big_a, cfg.spsa_alpha, cfg.spsa_gamma, spsa_rng)

        current = store.from_vector(vec)
        train_p1 = _batch_p1(model, current, train_idx, it, slot=1)
        dev_p1 = _batch_p1(model, current, dev_idx, it, slot=2)
        history.append(it, _mean_loss(train_p1, train_y),
                       accuracy(train_p1, train_y),
                       _mean_loss(dev_p1, dev_y),
                       accuracy(dev_p1, dev_y))

    return store.from_vector(vec), history


def evaluate_split(model: CompiledModel, store: ParameterStore,
                   split: str = "test",
                   iteration: int = -1) -> dict[str, float]:
    """Loss and accuracy of a split under a trained store."""
    ds = model.dataset
    idx, labels = getattr(ds, split), ds.labels(split)
    p1s = _batch_p1(model, store, idx, iteration, slot=3)
    return {
        f"{split}_loss": _mean_loss(p1s, labels),
        f"{split}_accuracy": accuracy(p1s, labels),
    }
