"""Geometric augmentation kernels over frame tensors.

Every kernel applies one spatial index map identically to all (time bin,
polarity) slices, moving entries around without rewriting their values, so
binarized input stays binarized. The same maps run on plain 2-D brightness
images via :func:`apply_to_image`, which lets the sensor-simulation harness
transform a scene and its event tensor with identical geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .events import FrameTensor, LabeledSample


@dataclass(frozen=True)
class Flip:
    """Mirror the horizontal axis: x -> W-1-x."""


@dataclass(frozen=True)
class Roll:
    """Shift content by (dx, dy) pixels, zero-filling unless circular."""

    dx: int
    dy: int
    circular: bool = False


@dataclass(frozen=True)
class Rotate:
    """Rotate about the exact image center; positive degrees are clockwise."""

    degrees: float


@dataclass(frozen=True)
class Cutout:
    """Zero a side x side square centered at (cx, cy), clipped at borders."""

    side: int
    cx: int
    cy: int

    def __post_init__(self) -> None:
        if self.side < 1:
            raise ValueError("cutout side must be at least 1")


@dataclass(frozen=True)
class ShearX:
    """Horizontal shear: row y shifts right by round(factor * y) pixels."""

    factor: float


@dataclass(frozen=True)
class Rect:
    """Half-open pixel rectangle rows [y0, y0+h), cols [x0, x0+w)."""

    y0: int
    x0: int
    h: int
    w: int

    def __post_init__(self) -> None:
        if self.h < 0 or self.w < 0 or self.y0 < 0 or self.x0 < 0:
            raise ValueError("rectangle must have non-negative origin and size")

    @property
    def area(self) -> int:
        return self.h * self.w


@dataclass(frozen=True)
class CutMix:
    """Paste ``rect`` from a partner sample; keep_fraction weights the labels."""

    rect: Rect
    keep_fraction: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.keep_fraction <= 1.0):
            raise ValueError("keep_fraction must lie in [0, 1]")


AugmentParams = Union[Flip, Roll, Rotate, Cutout, ShearX, CutMix]

# Kinds a sampled plan may contain (CutMix pairs samples and is dispatched
# separately by the policy layer).
PLAN_KINDS = (Roll, Rotate, Cutout, ShearX)


# ---------------------------------------------------------------------------
# Index-map cores shared by the tensor and image paths. Each operates on the
# trailing two (row, col) axes of an arbitrary array.


def _flip_core(arr: np.ndarray) -> np.ndarray:
    return arr[..., ::-1].copy()


def _roll_core(arr: np.ndarray, dx: int, dy: int, circular: bool) -> np.ndarray:
    if circular:
        return np.roll(arr, (dy, dx), axis=(-2, -1))
    h, w = arr.shape[-2:]
    out = np.zeros_like(arr)
    if abs(dx) >= w or abs(dy) >= h:
        return out
    dst_y = slice(max(dy, 0), h + min(dy, 0))
    dst_x = slice(max(dx, 0), w + min(dx, 0))
    src_y = slice(max(-dy, 0), h + min(-dy, 0))
    src_x = slice(max(-dx, 0), w + min(-dx, 0))
    out[..., dst_y, dst_x] = arr[..., src_y, src_x]
    return out


def _rotate_core(arr: np.ndarray, degrees: float) -> np.ndarray:
    h, w = arr.shape[-2:]
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    rad = math.radians(degrees)
    cos, sin = math.cos(rad), math.sin(rad)
    ydst, xdst = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    rel_x = xdst - cx
    rel_y = ydst - cy
    # Inverse map of a clockwise (screen coordinates, y down) rotation.
    src_x = np.rint(cx + cos * rel_x + sin * rel_y).astype(np.int64)
    src_y = np.rint(cy - sin * rel_x + cos * rel_y).astype(np.int64)
    valid = (src_x >= 0) & (src_x < w) & (src_y >= 0) & (src_y < h)
    out = arr[..., src_y.clip(0, h - 1), src_x.clip(0, w - 1)].copy()
    out[..., ~valid] = 0
    return out


def _cutout_core(arr: np.ndarray, side: int, cx: int, cy: int) -> np.ndarray:
    h, w = arr.shape[-2:]
    x0 = cx - side // 2
    y0 = cy - side // 2
    out = arr.copy()
    out[..., max(y0, 0) : max(y0 + side, 0), max(x0, 0) : max(x0 + side, 0)] = 0
    return out


def _shear_core(arr: np.ndarray, factor: float) -> np.ndarray:
    h, w = arr.shape[-2:]
    # Half-up rounding keeps the per-row shift deterministic for .5 ties.
    shifts = np.floor(factor * np.arange(h) + 0.5).astype(np.int64)
    src_x = np.arange(w)[None, :] - shifts[:, None]
    valid = (src_x >= 0) & (src_x < w)
    rows = np.arange(h)[:, None]
    out = arr[..., rows, src_x.clip(0, w - 1)].copy()
    out[..., ~valid] = 0
    return out


# ---------------------------------------------------------------------------
# FrameTensor kernels.


def flip_horizontal(frames: FrameTensor) -> FrameTensor:
    return FrameTensor(_flip_core(frames.data), binarized=frames.binarized)


def roll(frames: FrameTensor, dx: int, dy: int, circular: bool = False) -> FrameTensor:
    return FrameTensor(_roll_core(frames.data, dx, dy, circular), binarized=frames.binarized)


def rotate(frames: FrameTensor, degrees: float) -> FrameTensor:
    return FrameTensor(_rotate_core(frames.data, degrees), binarized=frames.binarized)


def cutout(frames: FrameTensor, side: int, cx: int, cy: int) -> FrameTensor:
    if side < 1:
        raise ValueError("cutout side must be at least 1")
    return FrameTensor(_cutout_core(frames.data, side, cx, cy), binarized=frames.binarized)


def shear_x(frames: FrameTensor, factor: float) -> FrameTensor:
    return FrameTensor(_shear_core(frames.data, factor), binarized=frames.binarized)


def cutmix(sample_a: LabeledSample, sample_b: LabeledSample, rect: Rect) -> LabeledSample:
    """Paste ``rect`` of sample_b into sample_a and area-mix the labels.

    The label weight is recomputed from the placed rectangle as an exact
    pixel-count fraction: keep = 1 - rect.area / (H * W).
    """
    a, b = sample_a.frames, sample_b.frames
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if sample_a.label.shape != sample_b.label.shape:
        raise ValueError("label length mismatch")
    _, _, h, w = a.shape
    if rect.y0 + rect.h > h or rect.x0 + rect.w > w:
        raise ValueError(f"rectangle {rect} exceeds {h}x{w} frame")
    data = a.data.copy()
    data[..., rect.y0 : rect.y0 + rect.h, rect.x0 : rect.x0 + rect.w] = b.data[
        ..., rect.y0 : rect.y0 + rect.h, rect.x0 : rect.x0 + rect.w
    ]
    keep = Fraction(h * w - rect.area, h * w)
    label = float(keep) * sample_a.label + float(1 - keep) * sample_b.label
    return LabeledSample(
        FrameTensor(data, binarized=a.binarized and b.binarized), label
    )


def apply(
    target: FrameTensor | LabeledSample,
    params: AugmentParams,
    partner: LabeledSample | None = None,
) -> FrameTensor | LabeledSample:
    """Apply one parameterized transform; deterministic given ``params``.

    CutMix needs ``target`` and ``partner`` to be labeled samples; every
    other kind accepts either a bare tensor or a labeled sample (the label
    passes through untouched).
    """
    if isinstance(params, CutMix):
        if not isinstance(target, LabeledSample) or partner is None:
            raise ValueError("CutMix needs a labeled sample and a partner sample")
        return cutmix(target, partner, params.rect)
    frames = target.frames if isinstance(target, LabeledSample) else target
    out = FrameTensor(_dispatch_core(frames.data, params), binarized=frames.binarized)
    if isinstance(target, LabeledSample):
        return LabeledSample(out, target.label)
    return out


def apply_to_image(image: np.ndarray, params: AugmentParams) -> np.ndarray:
    """Run the same index map on a single 2-D image (e.g. a brightness frame)."""
    img = np.asarray(image)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {img.shape}")
    if isinstance(params, CutMix):
        raise ValueError("CutMix pairs samples and has no single-image form")
    return _dispatch_core(img, params)


def _dispatch_core(arr: np.ndarray, params: AugmentParams) -> np.ndarray:
    if isinstance(params, Flip):
        return _flip_core(arr)
    if isinstance(params, Roll):
        return _roll_core(arr, params.dx, params.dy, params.circular)
    if isinstance(params, Rotate):
        return _rotate_core(arr, params.degrees)
    if isinstance(params, Cutout):
        return _cutout_core(arr, params.side, params.cx, params.cy)
    if isinstance(params, ShearX):
        return _shear_core(arr, params.factor)
    raise TypeError(f"unknown augmentation parameters: {params!r}")
