"""Counter-based random streams keyed by (seed, stream parts).

Each (seed, parts) pair names an independent Philox stream, so draws are
reproducible regardless of iteration order, worker count, or how many other
streams were consumed first. Python's salted hash() is not stable across
processes, so parts are folded with 64-bit FNV-1a instead.
"""

from __future__ import annotations

import numpy as np

_FNV_OFFSET64 = 0xCBF29CE484222325
_FNV_PRIME64 = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def _to_bytes(part: int | str | bytes) -> bytes:
    if isinstance(part, bytes):
        return part
    if isinstance(part, int):
        return (part & _MASK64).to_bytes(8, "little")
    return str(part).encode("utf-8")


def mix64(*parts: int | str | bytes) -> int:
    """Fold parts into one 64-bit value, stable across runs and platforms."""
    h = _FNV_OFFSET64
    for part in parts:
        for b in _to_bytes(part):
            h ^= b
            h = (h * _FNV_PRIME64) & _MASK64
        # Separator keeps ("ab",) and ("a", "b") distinct.
        h ^= 0xFF
        h = (h * _FNV_PRIME64) & _MASK64
    return h


def stream_rng(seed: int, *parts: int | str | bytes) -> np.random.Generator:
    """A Generator whose stream is fully determined by (seed, parts)."""
    key = np.array([seed & _MASK64, mix64(*parts)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
