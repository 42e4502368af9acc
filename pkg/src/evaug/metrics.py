"""Spike statistics: fire rate, operation-count estimates, and support F1."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .events import FrameTensor


@dataclass(frozen=True)
class LayerShape:
    """A layer name plus the multiply-accumulates a dense pass would run."""

    name: str
    macs_per_input: int

    def __post_init__(self) -> None:
        if self.macs_per_input < 0:
            raise ValueError("macs_per_input must be non-negative")


def fire_rate(spikes: FrameTensor) -> float:
    """Fraction of active entries in a binarized tensor."""
    if not spikes.binarized:
        raise ValueError("fire_rate needs a binarized tensor; call binarize() first")
    return int(spikes.data.sum()) / spikes.data.size


def synops_estimate(rates: Iterable[tuple[LayerShape, float]]) -> int:
    """Sum of fire_rate * MACs over layers, rounded to the nearest count.

    Operations are only charged where a spike fires, so a silent layer
    contributes nothing regardless of its dense cost.
    """
    total = 0.0
    for layer, rate in rates:
        if not (0.0 <= rate <= 1.0):
            raise ValueError(f"rate {rate} for layer {layer.name!r} outside [0, 1]")
        total += rate * layer.macs_per_input
    return int(round(total))


def event_f1(a: FrameTensor, b: FrameTensor) -> float:
    """F1 overlap of the active cells of two binarized tensors.

    2 * |A and B| / (|A| + |B|); two empty supports score 1.0.
    """
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if not (a.binarized and b.binarized):
        raise ValueError("event_f1 compares binarized tensors")
    size_a = int(a.data.sum())
    size_b = int(b.data.sum())
    if size_a == 0 and size_b == 0:
        return 1.0
    inter = int((a.data & b.data).sum())
    return 2.0 * inter / (size_a + size_b)


def sparsity(frames: FrameTensor) -> float:
    """Fraction of zero entries (defined for counts as well)."""
    return 1.0 - int(np.count_nonzero(frames.data)) / frames.data.size
