"""Buffer-level binding of the evaug augmentation hot path.

Training pipelines hand in plain numpy arrays and get fresh arrays back;
results are bit-identical to the evaug library under the same
(seed, sample index). Only the hot-path operations are exposed: plan
application and two-view generation. File I/O and simulation stay with
the main package.

Buffer contract (matches the frame-container payload):
  - shape (T, P, H, W) with P == 2, row-major (C-contiguous),
  - dtype uint8 for binarized data (entries 0/1) or uint16 for counts,
  - input buffers are caller-owned and never modified; outputs are freshly
    allocated, writable, and of the same dtype as the input.
"""

from __future__ import annotations

import numpy as np

from evaug import FrameTensor, LabeledSample
from evaug import Policy as _CorePolicy
from evaug import augment_sample, make_contrastive_pair

__all__ = ["BufferSpecError", "Policy", "__version__"]

__version__ = "0.1.0"

_ALLOWED_DTYPES = (np.uint8, np.uint16)


class BufferSpecError(TypeError):
    """A buffer violates the exchange contract; ``field`` names the offender."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _check_buffer(array: np.ndarray, name: str) -> np.ndarray:
    if not isinstance(array, np.ndarray):
        raise BufferSpecError(f"{name}.type", f"expected numpy.ndarray, got {type(array).__name__}")
    if array.ndim != 4:
        raise BufferSpecError(f"{name}.ndim", f"expected 4 axes (T, P, H, W), got {array.ndim}")
    if array.shape[1] != 2:
        raise BufferSpecError(
            f"{name}.shape", f"polarity axis must have size 2, got {array.shape[1]}"
        )
    if array.dtype not in (np.dtype(np.uint8), np.dtype(np.uint16)):
        raise BufferSpecError(
            f"{name}.dtype", f"expected uint8 (binarized) or uint16 (counts), got {array.dtype}"
        )
    if not array.flags.c_contiguous:
        raise BufferSpecError(f"{name}.layout", "buffer must be row-major (C-contiguous)")
    if array.dtype == np.dtype(np.uint8) and array.size and int(array.max()) > 1:
        raise BufferSpecError(
            f"{name}.values",
            f"uint8 buffers hold binarized data; found value {int(array.max())}",
        )
    return array


def _to_tensor(array: np.ndarray, name: str) -> FrameTensor:
    arr = _check_buffer(array, name)
    return FrameTensor(arr, binarized=arr.dtype == np.dtype(np.uint8))


def _to_buffer(frames: FrameTensor) -> np.ndarray:
    # Callee-allocated output: fresh, writable, same dtype as the input path.
    return np.array(frames.data, copy=True)


_UNIT_LABEL = np.ones(1)


class Policy:
    """Sampling configuration mirroring ``evaug.Policy``.

    ``augment`` and ``pair`` reproduce the library's draws exactly for the
    same (seed, sample index); instances hold no mutable state, so calls
    are reentrant and worker-safe.
    """

    def __init__(
        self,
        m: int = 1,
        n: int = 2,
        flip_prob: float = 0.5,
        cutmix: bool = True,
        seed: int = 0,
    ):
        self._core = _CorePolicy(
            num_transforms=m,
            level=n,
            flip_prob=flip_prob,
            cutmix_enabled=cutmix,
            seed=seed,
        )

    @classmethod
    def from_config(cls, text: str) -> "Policy":
        """Accepts the same ``m=1,n=2,...`` text the command line uses."""
        core = _CorePolicy.from_config(text)
        policy = cls.__new__(cls)
        policy._core = core
        return policy

    @property
    def config(self) -> str:
        return self._core.to_config()

    def augment(
        self,
        array: np.ndarray,
        index: int,
        partner: np.ndarray | None = None,
    ) -> np.ndarray:
        """Apply the sampled plan (and CutMix when enabled) for one sample."""
        sample = LabeledSample(_to_tensor(array, "array"), _UNIT_LABEL)
        partner_sample = None
        if partner is not None:
            partner_sample = LabeledSample(_to_tensor(partner, "partner"), _UNIT_LABEL)
        if self._core.cutmix_enabled and partner_sample is None:
            raise BufferSpecError("partner", "CutMix is enabled but no partner buffer was given")
        out = augment_sample(sample, partner_sample, self._core, index)
        return _to_buffer(out.frames)

    def pair(self, array: np.ndarray, index: int) -> tuple[np.ndarray, np.ndarray]:
        """Two independently augmented views of one input (no CutMix)."""
        frames = _to_tensor(array, "array")
        view1, view2 = make_contrastive_pair(frames, self._core, index)
        return _to_buffer(view1), _to_buffer(view2)
