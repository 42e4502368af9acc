"""Transform-plan sampling: always-on flip/CutMix defaults plus M kinds at
intensity level N, with every draw keyed by (seed, sample index) so data
loaders get identical plans no matter how work is sharded."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from . import transforms
from .events import FrameTensor, LabeledSample
from .rng import stream_rng
from .transforms import Cutout, CutMix, Flip, Rect, Roll, Rotate, ShearX


@dataclass(frozen=True)
class Intensity:
    """Parameter bounds for one intensity level."""

    max_shift: int  # roll displacement, pixels
    max_degrees: float  # rotation angle
    max_cutout: int  # cutout side, pixels
    max_shear: float  # shear factor

    def __post_init__(self) -> None:
        if min(self.max_shift, self.max_degrees, self.max_cutout, self.max_shear) <= 0:
            raise ValueError("intensity bounds must be positive")


_INTENSITY_LEVELS = {
    1: Intensity(max_shift=3, max_degrees=15.0, max_cutout=8, max_shear=0.15),
    2: Intensity(max_shift=5, max_degrees=30.0, max_cutout=16, max_shear=0.30),
    3: Intensity(max_shift=7, max_degrees=45.0, max_cutout=24, max_shear=0.45),
}


def lookup_intensity(level: int) -> Intensity:
    """Exact bound table for levels 1..3."""
    try:
        return _INTENSITY_LEVELS[level]
    except KeyError:
        raise ValueError(f"intensity level must be 1, 2 or 3, got {level}") from None


@dataclass(frozen=True)
class Policy:
    """An (M, N) sampling configuration.

    ``num_transforms`` (M, 1..4) kinds are drawn per sample without
    replacement from roll/rotate/cutout/shear at level ``level`` (N, 1..3);
    a horizontal flip is prepended with probability ``flip_prob`` and CutMix
    runs afterwards when enabled, with its kept-area fraction drawn from
    Beta(``cutmix_alpha``).
    """

    num_transforms: int = 1
    level: int = 2
    flip_prob: float = 0.5
    cutmix_enabled: bool = True
    cutmix_alpha: tuple[float, float] = (1.0, 1.0)
    seed: int = 0

    def __post_init__(self) -> None:
        if not (1 <= self.num_transforms <= 4):
            raise ValueError(f"M must be 1..4, got {self.num_transforms}")
        if self.level not in (1, 2, 3):
            raise ValueError(f"N must be 1..3, got {self.level}")
        if not (0.0 <= self.flip_prob <= 1.0):
            raise ValueError("flip_prob must lie in [0, 1]")
        if min(self.cutmix_alpha) <= 0:
            raise ValueError("cutmix_alpha parameters must be positive")

    def to_config(self) -> str:
        """Text form consumed by the command line, e.g. ``m=1,n=2,...``."""
        return (
            f"m={self.num_transforms},n={self.level},flip_prob={self.flip_prob:g},"
            f"cutmix={'on' if self.cutmix_enabled else 'off'},seed={self.seed}"
        )

    @classmethod
    def from_config(cls, text: str) -> "Policy":
        """Parse ``key=value`` pairs separated by commas or whitespace."""
        policy = cls()
        for item in text.replace(",", " ").split():
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"expected key=value, got {item!r}")
            key = key.strip().lower()
            value = value.strip()
            if key == "m":
                policy = replace(policy, num_transforms=int(value))
            elif key == "n":
                policy = replace(policy, level=int(value))
            elif key == "flip_prob":
                policy = replace(policy, flip_prob=float(value))
            elif key == "cutmix":
                if value not in ("on", "off"):
                    raise ValueError(f"cutmix must be on/off, got {value!r}")
                policy = replace(policy, cutmix_enabled=value == "on")
            elif key == "seed":
                policy = replace(policy, seed=int(value))
            else:
                raise ValueError(f"unknown policy key {key!r}")
        return policy


def _draw_plan(
    policy: Policy, rng: np.random.Generator, height: int, width: int
) -> list[transforms.AugmentParams]:
    bounds = lookup_intensity(policy.level)
    plan: list[transforms.AugmentParams] = []
    if rng.random() < policy.flip_prob:
        plan.append(Flip())
    kinds = rng.choice(len(transforms.PLAN_KINDS), size=policy.num_transforms, replace=False)
    for kind in kinds:
        if kind == 0:
            c = bounds.max_shift
            plan.append(Roll(dx=int(rng.integers(-c, c + 1)), dy=int(rng.integers(-c, c + 1))))
        elif kind == 1:
            d = bounds.max_degrees
            plan.append(Rotate(degrees=float(rng.uniform(-d, d))))
        elif kind == 2:
            plan.append(
                Cutout(
                    side=int(rng.integers(1, bounds.max_cutout + 1)),
                    cx=int(rng.integers(0, width)),
                    cy=int(rng.integers(0, height)),
                )
            )
        else:
            n = bounds.max_shear
            plan.append(ShearX(factor=float(rng.uniform(-n, n))))
    return plan


def sample_plan(
    policy: Policy, sample_index: int, height: int, width: int
) -> list[transforms.AugmentParams]:
    """Draw the ordered transform list for one sample.

    The plan is fully determined by (policy.seed, sample_index); the frame
    geometry is needed to place cutout centers.
    """
    rng = stream_rng(policy.seed, "plan", sample_index)
    return _draw_plan(policy, rng, height, width)


def apply_plan(
    frames: FrameTensor, plan: list[transforms.AugmentParams]
) -> FrameTensor:
    """Run a plan's transforms in order over every (bin, polarity) slice."""
    for params in plan:
        frames = transforms.apply(frames, params)  # type: ignore[assignment]
    return frames


def _sample_rect(
    keep_fraction: float, height: int, width: int, rng: np.random.Generator
) -> Rect:
    # Square mask of area (1 - keep) * H * W, centered uniformly and clipped.
    side = int(round(math.sqrt((1.0 - keep_fraction) * height * width)))
    cx = int(rng.integers(0, width))
    cy = int(rng.integers(0, height))
    x0 = max(cx - side // 2, 0)
    y0 = max(cy - side // 2, 0)
    x1 = min(cx - side // 2 + side, width)
    y1 = min(cy - side // 2 + side, height)
    return Rect(y0=y0, x0=x0, h=max(y1 - y0, 0), w=max(x1 - x0, 0))


def augment_sample(
    sample: LabeledSample,
    partner: LabeledSample | None,
    policy: Policy,
    sample_index: int,
) -> LabeledSample:
    """Apply a sampled plan, then CutMix against ``partner`` when enabled.

    The label mix uses the kept-area fraction of the rectangle actually
    placed (exact as a pixel-count rational), not the Beta draw that sized
    it, so label weights always match the realized mask.
    """
    if policy.cutmix_enabled and partner is None:
        raise ValueError("CutMix is enabled but no partner sample was given")
    _, _, height, width = sample.frames.shape
    plan = sample_plan(policy, sample_index, height, width)
    frames = apply_plan(sample.frames, plan)
    result = LabeledSample(frames, sample.label)
    if policy.cutmix_enabled:
        assert partner is not None
        rng = stream_rng(policy.seed, "cutmix", sample_index)
        drawn = float(rng.beta(*policy.cutmix_alpha))
        rect = _sample_rect(drawn, height, width, rng)
        result = transforms.cutmix(result, partner, rect)
    return result


def realized_keep_fraction(rect: Rect, height: int, width: int) -> Fraction:
    """Exact kept-area fraction for a placed CutMix rectangle."""
    return Fraction(height * width - rect.area, height * width)


def make_contrastive_pair(
    frames: FrameTensor, policy: Policy, sample_index: int
) -> tuple[FrameTensor, FrameTensor]:
    """Two independently augmented views of one input (no CutMix, no labels)."""
    _, _, height, width = frames.shape
    views = []
    for view_index in (0, 1):
        rng = stream_rng(policy.seed, "view", sample_index, view_index)
        plan = _draw_plan(policy, rng, height, width)
        views.append(apply_plan(frames, plan))
    return views[0], views[1]
