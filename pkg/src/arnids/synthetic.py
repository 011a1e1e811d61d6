"""Synthetic tasks with known structure, used to verify that training works.

The long-range task is the interesting one: the class of a sequence is
decided solely by the token at the first step, and every later step carries
an uninformative token drawn from the same alphabet. A model can only solve
it by carrying information across the whole window.
"""

from __future__ import annotations

import numpy as np

from .errors import UsageError
from .numeric import make_rng

# Token alphabet for the long-range task: index 0 is the reserved unknown
# slot, 1 and 2 are the two real tokens.
LONG_RANGE_VOCAB = 3


def long_range_task(num_sequences: int, length: int = 20, seed: int = 0):
    """Sequences whose class is readable only from the first token.

    Step 0 holds token 1 for class 0 and token 2 for class 1; steps 1..T-1
    hold tokens drawn uniformly from {1, 2}, so nothing after the first step
    correlates with the label. Returns (windows [N x T x 1], labels [N]);
    the single slot per step is a vocabulary index.
    """
    if num_sequences < 2:
        raise UsageError(f"need at least 2 sequences, got {num_sequences}")
    if length < 1:
        raise UsageError(f"length must be >= 1, got {length}")
    rng = make_rng(seed)
    labels = np.arange(num_sequences) % 2
    rng.shuffle(labels)
    tokens = rng.integers(1, 3, size=(num_sequences, length))
    tokens[:, 0] = labels + 1
    windows = tokens[:, :, None].astype(np.float64)
    return windows, labels.astype(np.int64)


def gaussian_blobs(num_per_class: int, dim: int = 2, separation: float = 4.0, seed: int = 0):
    """Two spherical Gaussian clusters as length-1 windows.

    Linearly separable for comfortable separation values; handy as a
    smoke test that the optimizer actually reduces loss.
    """
    if num_per_class < 1:
        raise UsageError(f"need at least 1 point per class, got {num_per_class}")
    rng = make_rng(seed)
    n = 2 * num_per_class
    labels = np.arange(n) % 2
    rng.shuffle(labels)
    centers = np.where(labels[:, None] == 0, -separation / 2.0, separation / 2.0)
    points = centers + rng.standard_normal((n, dim))
    windows = points[:, None, :]
    return windows, labels.astype(np.int64)
