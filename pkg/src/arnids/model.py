"""Window classifier built around a recurrent cell.

A window of traffic records is consumed one record per step, starting from a
zero state. Numeric fields pass straight into the cell; categorical fields
arrive as vocabulary indices and are looked up in per-field embedding tables
first. A single linear layer over the final state produces class scores.

The recurrent core is pluggable: the attention-based cell or the gated
baseline, selected by ``ModelConfig.cell_kind``. Everything around the core
(embeddings, head, loss) is identical for both.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .arn import ArnParams, arn_step, arn_step_backward, init_arn_params
from .errors import DataError, ShapeError, UsageError
from .gru import GruParams, gru_step, gru_step_backward, init_gru_params
from .numeric import as_tensor, init_uniform, make_rng

CELL_KINDS = ("arn", "gru")


@dataclass
class ModelConfig:
    """Shape and seeding choices for one classifier."""

    cell_kind: str = "arn"
    n: int = 100
    num_classes: int = 2
    window: int = 10
    embed_dim: int = 16
    seed: int = 0
    num_numeric: int = 0
    vocab_sizes: tuple = ()

    @property
    def num_slots(self) -> int:
        """Columns per record as stored in a window array."""
        return self.num_numeric + len(self.vocab_sizes)

    @property
    def m(self) -> int:
        """Cell input width after embedding lookup."""
        return self.num_numeric + len(self.vocab_sizes) * self.embed_dim

    def validate(self) -> None:
        if self.cell_kind not in CELL_KINDS:
            raise UsageError(f"cell_kind must be one of {CELL_KINDS}, got {self.cell_kind!r}")
        if self.n < 1:
            raise UsageError(f"hidden size must be >= 1, got {self.n}")
        if self.window < 1:
            raise UsageError(f"window must be >= 1, got {self.window}")
        if self.num_classes < 2:
            raise UsageError(f"num_classes must be >= 2, got {self.num_classes}")
        if self.embed_dim < 1:
            raise UsageError(f"embed_dim must be >= 1, got {self.embed_dim}")
        if self.num_numeric < 0:
            raise UsageError(f"num_numeric must be >= 0, got {self.num_numeric}")
        for i, v in enumerate(self.vocab_sizes):
            if v < 1:
                raise UsageError(f"vocab size for categorical field {i} must be >= 1, got {v}")
        if self.m < 1:
            raise UsageError("model needs at least one input feature")


@dataclass
class Classifier:
    config: ModelConfig
    cell: Union[ArnParams, GruParams]
    head_W: np.ndarray
    head_b: np.ndarray
    embeddings: list = field(default_factory=list)

    def named_params(self) -> dict:
        """Flat name -> tensor view of every trainable array."""
        out: dict = {}
        if isinstance(self.cell, ArnParams):
            out["cell.Wx"] = self.cell.Wx
            out["cell.Wh"] = self.cell.Wh
            out["cell.satt.Wq"] = self.cell.satt.Wq
            out["cell.satt.Wk"] = self.cell.satt.Wk
            out["cell.satt.Wv"] = self.cell.satt.Wv
        else:
            out["cell.W_R"] = self.cell.W_R
            out["cell.W_Z"] = self.cell.W_Z
            out["cell.W_h"] = self.cell.W_h
        out["head.W"] = self.head_W
        out["head.b"] = self.head_b
        for i, emb in enumerate(self.embeddings):
            out[f"emb.{i}"] = emb
        return out

    def param_count(self) -> dict:
        counts = {name: int(t.size) for name, t in self.named_params().items()}
        counts["total"] = sum(counts.values())
        return counts


def init_classifier(config: ModelConfig) -> Classifier:
    """Build a classifier with seeded uniform initialization.

    Draw order is fixed (cell, head, embeddings) so a given (config, seed)
    pair always yields bit-identical parameters.
    """
    config.validate()
    rng = make_rng(config.seed)
    n, m = config.n, config.m
    if config.cell_kind == "arn":
        cell: Union[ArnParams, GruParams] = init_arn_params(rng, n, m)
    else:
        cell = init_gru_params(rng, n, m)
    head_W = init_uniform(rng, (config.num_classes, n), 1.0 / np.sqrt(n))
    head_b = np.zeros(config.num_classes)
    # unit-scale embeddings keep attention scores responsive from the start;
    # much smaller tokens leave the score softmax pinned near its midpoint
    embeddings = [init_uniform(rng, (v, config.embed_dim), 1.0) for v in config.vocab_sizes]
    return Classifier(config=config, cell=cell, head_W=head_W, head_b=head_b, embeddings=embeddings)


def _encode_records(clf: Classifier, slots: np.ndarray):
    """Expand one batch of records [B x num_slots] to cell inputs [B x m].

    Returns the cell input together with the per-field index arrays needed
    to route gradients back into the embedding tables.
    """
    cfg = clf.config
    k = cfg.num_numeric
    pieces = [slots[:, :k]]
    index_lists = []
    for i, vocab in enumerate(cfg.vocab_sizes):
        idx = slots[:, k + i].astype(np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= vocab):
            raise DataError(
                f"categorical field {i} has index outside [0, {vocab}) in encoded window"
            )
        index_lists.append(idx)
        pieces.append(clf.embeddings[i][idx])
    x = pieces[0] if len(pieces) == 1 else np.concatenate(pieces, axis=-1)
    return np.ascontiguousarray(x), index_lists


def _check_windows(clf: Classifier, windows: np.ndarray) -> np.ndarray:
    windows = np.asarray(windows, dtype=np.float64)
    cfg = clf.config
    if windows.ndim == 2:
        windows = windows[None]
    if windows.ndim != 3:
        raise ShapeError(f"windows must be [B x T x slots], got shape {windows.shape}")
    if windows.shape[1] != cfg.window or windows.shape[2] != cfg.num_slots:
        raise ShapeError(
            f"expected windows of shape [* x {cfg.window} x {cfg.num_slots}], "
            f"got {windows.shape}"
        )
    return windows


def _step(clf: Classifier, h, x):
    if isinstance(clf.cell, ArnParams):
        return arn_step(clf.cell, h, x)
    return gru_step(clf.cell, h, x)


def _run_cell(clf: Classifier, windows: np.ndarray):
    """Unroll the cell over every window in the batch.

    Returns the final states [B x n] and the per-step records needed for
    backprop: (cell trace, embedding index arrays).
    """
    B, T, _ = windows.shape
    h = np.zeros((B, clf.config.n))
    steps = []
    for t in range(T):
        x, index_lists = _encode_records(clf, windows[:, t, :])
        trace = _step(clf, h, x)
        steps.append((trace, index_lists))
        h = trace.h_t
    return h, steps


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    return shifted - log_z


def predict_proba(clf: Classifier, windows: np.ndarray) -> np.ndarray:
    """Class probabilities for a batch of windows, one row per window."""
    windows = _check_windows(clf, windows)
    h, _ = _run_cell(clf, windows)
    logits = h @ clf.head_W.T + clf.head_b
    return np.exp(_log_softmax(logits))


def predict(clf: Classifier, windows: np.ndarray) -> np.ndarray:
    """Hard class decisions (argmax of predict_proba)."""
    return np.argmax(predict_proba(clf, windows), axis=-1)


def forward(clf: Classifier, window: np.ndarray):
    """Run one window through the model.

    Returns the class probability vector and the step traces, newest last.
    """
    window = as_tensor(window)
    if window.ndim != 2:
        raise ShapeError(f"a single window must be [T x slots], got shape {window.shape}")
    windows = _check_windows(clf, window)
    h, steps = _run_cell(clf, windows)
    logits = h @ clf.head_W.T + clf.head_b
    probs = np.exp(_log_softmax(logits))[0]
    return probs, steps


def loss_and_grads(clf: Classifier, windows: np.ndarray, labels: np.ndarray):
    """Mean cross-entropy over the batch plus gradients for every parameter.

    Gradients are accumulated by stepping backward through the unrolled cell,
    so early records influence the result through the whole chain of states.
    """
    windows = _check_windows(clf, windows)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    B = windows.shape[0]
    if B == 0:
        raise UsageError("loss_and_grads needs a nonempty batch")
    if labels.shape[0] != B:
        raise ShapeError(f"{B} windows but {labels.shape[0]} labels")
    cfg = clf.config
    if labels.size and (labels.min() < 0 or labels.max() >= cfg.num_classes):
        raise DataError(f"labels must lie in [0, {cfg.num_classes})")

    h, steps = _run_cell(clf, windows)
    logits = h @ clf.head_W.T + clf.head_b
    log_p = _log_softmax(logits)
    loss = float(-log_p[np.arange(B), labels].mean())

    probs = np.exp(log_p)
    d_logits = probs.copy()
    d_logits[np.arange(B), labels] -= 1.0
    d_logits /= B

    grads = {name: np.zeros_like(t) for name, t in clf.named_params().items()}
    grads["head.W"] += d_logits.T @ h
    grads["head.b"] += d_logits.sum(axis=0)
    d_h = d_logits @ clf.head_W

    arn = isinstance(clf.cell, ArnParams)
    k = cfg.num_numeric
    d = cfg.embed_dim
    for trace, index_lists in reversed(steps):
        if arn:
            dWx, dWh, dWq, dWk, dWv, d_h, d_x = arn_step_backward(clf.cell, trace, d_h)
            grads["cell.Wx"] += dWx
            grads["cell.Wh"] += dWh
            grads["cell.satt.Wq"] += dWq
            grads["cell.satt.Wk"] += dWk
            grads["cell.satt.Wv"] += dWv
        else:
            dW_R, dW_Z, dW_h, d_h, d_x = gru_step_backward(clf.cell, trace, d_h)
            grads["cell.W_R"] += dW_R
            grads["cell.W_Z"] += dW_Z
            grads["cell.W_h"] += dW_h
        for i, idx in enumerate(index_lists):
            chunk = d_x[:, k + i * d : k + (i + 1) * d]
            np.add.at(grads[f"emb.{i}"], idx, chunk)

    return loss, grads
