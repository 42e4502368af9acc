"""Core event and frame-tensor types plus events-to-frames integration."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

LABEL_SUM_TOL = 1e-6


class Event(NamedTuple):
    """One sensor event: timestamp in microseconds, pixel position, polarity.

    Polarity is 0 for a brightness decrease (OFF) and 1 for an increase (ON).
    """

    t: int
    x: int
    y: int
    p: int


@dataclass(frozen=True)
class EventStream:
    """Time-ordered events plus sensor geometry.

    Events are stably sorted by timestamp at construction, so simultaneous
    events keep their insertion order. ``duration`` defaults to ``max(t) + 1``
    (1 for an empty stream); a declared duration must cover every timestamp.
    """

    events: tuple[Event, ...]
    width: int
    height: int
    duration: int | None = None

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError("sensor dimensions must be positive")
        events = tuple(e if isinstance(e, Event) else Event(*e) for e in self.events)
        for i, e in enumerate(events):
            if e.t < 0:
                raise ValueError(f"event {i}: negative timestamp {e.t}")
            if not (0 <= e.x < self.width and 0 <= e.y < self.height):
                raise ValueError(
                    f"event {i}: position ({e.x}, {e.y}) outside "
                    f"{self.width}x{self.height} sensor"
                )
            if e.p not in (0, 1):
                raise ValueError(f"event {i}: polarity {e.p} not in {{0, 1}}")
        events = tuple(sorted(events, key=lambda e: e.t))
        max_t = events[-1].t if events else None
        duration = self.duration
        if duration is None:
            duration = max_t + 1 if events else 1
        elif duration < 1:
            raise ValueError("duration must be positive")
        elif max_t is not None and duration <= max_t:
            raise ValueError(f"duration {duration} does not cover timestamp {max_t}")
        object.__setattr__(self, "events", events)
        object.__setattr__(self, "duration", int(duration))

    def __len__(self) -> int:
        return len(self.events)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Return (t, x, y, p) as int64 arrays in stream order."""
        if not self.events:
            z = np.zeros(0, dtype=np.int64)
            return z, z.copy(), z.copy(), z.copy()
        a = np.asarray(self.events, dtype=np.int64)
        return a[:, 0], a[:, 1], a[:, 2], a[:, 3]


@dataclass(frozen=True, eq=False)
class FrameTensor:
    """Dense per-bin event counts with axes (time bin, polarity, row, col).

    Entries are non-negative integers; with ``binarized`` set they are
    restricted to {0, 1}. The backing array is copied and frozen, so tensors
    can be shared across threads.
    """

    data: np.ndarray
    binarized: bool = False

    def __post_init__(self) -> None:
        arr = np.asarray(self.data)
        if arr.ndim != 4 or arr.shape[1] != 2:
            raise ValueError(f"expected shape (T, 2, H, W), got {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValueError(f"expected an integer dtype, got {arr.dtype}")
        if arr.size:
            if int(arr.min()) < 0:
                raise ValueError("negative entries are not allowed")
            if self.binarized and int(arr.max()) > 1:
                raise ValueError("binarized tensor must contain only 0 and 1")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.data.shape  # type: ignore[return-value]

    def total(self) -> int:
        """Total event count across all bins, polarities and cells."""
        return int(self.data.sum())


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """A frame tensor plus a soft label (class weights summing to 1)."""

    frames: FrameTensor
    label: np.ndarray

    def __post_init__(self) -> None:
        lab = np.asarray(self.label, dtype=np.float64)
        if lab.ndim != 1 or lab.size == 0:
            raise ValueError("label must be a non-empty 1-D vector")
        if lab.min() < 0:
            raise ValueError("label weights must be non-negative")
        if abs(float(lab.sum()) - 1.0) > LABEL_SUM_TOL:
            raise ValueError(f"label weights sum to {lab.sum()}, expected 1")
        lab = lab.copy()
        lab.flags.writeable = False
        object.__setattr__(self, "label", lab)


def one_hot(class_index: int, num_classes: int) -> np.ndarray:
    """One-hot label vector for an unmixed sample."""
    if not (0 <= class_index < num_classes):
        raise ValueError(f"class {class_index} out of range for {num_classes} classes")
    lab = np.zeros(num_classes, dtype=np.float64)
    lab[class_index] = 1.0
    return lab


def integrate_frames(
    stream: EventStream,
    num_bins: int,
    mode: str = "equal-duration",
    binarize: bool = False,
) -> FrameTensor:
    """Accumulate an event stream into a (num_bins, 2, H, W) count tensor.

    ``equal-duration`` splits [0, duration) into equal half-open intervals;
    ``equal-count`` assigns ceil(n / num_bins)-sized contiguous event slices
    per bin (the last bins may be smaller or empty). Every event lands in
    exactly one (bin, polarity, cell), so the tensor total equals the event
    count unless ``binarize`` clamps it.
    """
    if num_bins < 1:
        raise ValueError("num_bins must be at least 1")
    if mode not in ("equal-duration", "equal-count"):
        raise ValueError(f"unknown mode {mode!r}")
    n = len(stream)
    if mode == "equal-count" and n == 0:
        raise ValueError("equal-count mode needs a non-empty stream")
    out = np.zeros((num_bins, 2, stream.height, stream.width), dtype=np.int32)
    if n:
        t, x, y, p = stream.arrays()
        if mode == "equal-duration":
            # Integer arithmetic keeps the half-open interval edges exact.
            bins = (t * num_bins) // stream.duration
        else:
            chunk = -(-n // num_bins)
            bins = np.arange(n, dtype=np.int64) // chunk
        np.add.at(out, (bins, p, y, x), 1)
    if binarize:
        out = np.minimum(out, 1).astype(np.uint8)
    return FrameTensor(out, binarized=binarize)


def resize_spatial(frames: FrameTensor, out_h: int, out_w: int) -> FrameTensor:
    """Sum-pool a tensor onto an (out_h, out_w) grid.

    Each input cell (y, x) contributes to exactly one output cell
    (floor(y * out_h / H), floor(x * out_w / W)), so the total count is
    preserved; binarized input is re-clamped to {0, 1}.
    """
    if out_h < 1 or out_w < 1:
        raise ValueError("target dimensions must be positive")
    t_bins, _, h, w = frames.shape
    if (out_h, out_w) == (h, w):
        return FrameTensor(frames.data, binarized=frames.binarized)
    rows = (np.arange(h, dtype=np.int64) * out_h) // h
    cols = (np.arange(w, dtype=np.int64) * out_w) // w
    pool_rows = np.zeros((out_h, h), dtype=np.int64)
    pool_rows[rows, np.arange(h)] = 1
    pool_cols = np.zeros((w, out_w), dtype=np.int64)
    pool_cols[np.arange(w), cols] = 1
    out = pool_rows @ frames.data.astype(np.int64) @ pool_cols
    if frames.binarized:
        return FrameTensor(np.minimum(out, 1).astype(np.uint8), binarized=True)
    return FrameTensor(out.astype(np.int32), binarized=False)


def binarize(frames: FrameTensor) -> FrameTensor:
    """Clamp entries to {0, 1} and set the flag; idempotent."""
    if frames.binarized:
        return frames
    return FrameTensor(np.minimum(frames.data, 1).astype(np.uint8), binarized=True)
