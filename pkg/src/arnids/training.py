"""Epoch loop and optimizer.

Training runs for exactly the configured number of epochs: no validation
split, no early stopping. Window order is reshuffled every epoch from the
run seed, so a (seed, data, config) triple pins down the trained weights
bit for bit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, ShapeError, UsageError
from .model import Classifier, loss_and_grads, predict
from .numeric import make_rng


@dataclass
class TrainConfig:
    epochs: int = 10
    lr: float = 0.001
    batch_size: int = 64
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    clip_norm: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if self.epochs < 0:
            raise UsageError(f"epochs must be >= 0, got {self.epochs}")
        if self.lr <= 0:
            raise UsageError(f"learning rate must be positive, got {self.lr}")
        if self.batch_size < 1:
            raise UsageError(f"batch_size must be >= 1, got {self.batch_size}")
        for name in ("adam_beta1", "adam_beta2"):
            b = getattr(self, name)
            if not 0.0 < b < 1.0:
                raise UsageError(f"{name} must lie in (0, 1), got {b}")
        if self.adam_eps <= 0:
            raise UsageError(f"adam_eps must be positive, got {self.adam_eps}")
        if self.clip_norm < 0:
            raise UsageError(f"clip_norm must be >= 0 (0 disables), got {self.clip_norm}")


@dataclass
class AdamState:
    """First and second moment estimates per parameter, plus the step count."""

    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    t: int = 0

    @classmethod
    def for_params(cls, params: dict) -> "AdamState":
        return cls(
            m={k: np.zeros_like(p) for k, p in params.items()},
            v={k: np.zeros_like(p) for k, p in params.items()},
            t=0,
        )


@dataclass
class EpochStats:
    epoch: int
    mean_loss: float
    train_accuracy: float
    wall_seconds: float


def clip_gradients(grads: dict, max_norm: float) -> float:
    """Scale all gradients so their joint L2 norm is at most max_norm.

    Returns the pre-clip norm. A max_norm of 0 disables clipping.
    """
    total = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if max_norm > 0 and total > max_norm:
        factor = max_norm / total
        for g in grads.values():
            g *= factor
    return total


def adam_update(state: AdamState, params: dict, grads: dict, cfg: TrainConfig) -> None:
    """One bias-corrected Adam step, applied to the parameter arrays in place."""
    for name, p in params.items():
        if name not in grads:
            raise UsageError(f"no gradient supplied for parameter {name!r}")
        if grads[name].shape != p.shape:
            raise ShapeError(
                f"gradient for {name!r} has shape {grads[name].shape}, "
                f"parameter has {p.shape}"
            )
    state.t += 1
    b1, b2 = cfg.adam_beta1, cfg.adam_beta2
    bias1 = 1.0 - b1**state.t
    bias2 = 1.0 - b2**state.t
    for name, p in params.items():
        g = grads[name]
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= cfg.lr * (m / bias1) / (np.sqrt(v / bias2) + cfg.adam_eps)


def train(clf: Classifier, windows: np.ndarray, labels: np.ndarray, cfg: TrainConfig):
    """Fit the classifier on encoded windows; returns per-epoch history.

    The model is updated in place and also returned. Non-finite loss aborts
    immediately with the epoch and batch where it appeared.
    """
    cfg.validate()
    windows = np.asarray(windows, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    total = windows.shape[0] if windows.ndim == 3 else 0
    if total == 0:
        raise UsageError("training set is empty")
    if labels.shape[0] != total:
        raise ShapeError(f"{total} windows but {labels.shape[0]} labels")

    params = clf.named_params()
    state = AdamState.for_params(params)
    rng = make_rng(cfg.seed)
    history: list[EpochStats] = []

    for epoch in range(cfg.epochs):
        started = time.perf_counter()
        order = rng.permutation(total)
        loss_sum = 0.0
        for batch_index, start in enumerate(range(0, total, cfg.batch_size)):
            pick = order[start : start + cfg.batch_size]
            loss, grads = loss_and_grads(clf, windows[pick], labels[pick])
            if not np.isfinite(loss):
                raise NumericError(
                    f"training diverged: non-finite loss at epoch {epoch}, "
                    f"batch {batch_index}"
                )
            clip_gradients(grads, cfg.clip_norm)
            adam_update(state, params, grads, cfg)
            loss_sum += loss * len(pick)
        accuracy = float(np.mean(predict(clf, windows) == labels))
        history.append(
            EpochStats(
                epoch=epoch,
                mean_loss=loss_sum / total,
                train_accuracy=accuracy,
                wall_seconds=time.perf_counter() - started,
            )
        )
    return clf, history


def history_lines(history) -> list[str]:
    """Tab-separated log lines, one per epoch: epoch, loss, accuracy, seconds."""
    return [
        f"{s.epoch}\t{s.mean_loss:.6f}\t{s.train_accuracy:.6f}\t{s.wall_seconds:.3f}"
        for s in history
    ]
