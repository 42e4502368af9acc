"""Bit-exact parsers and writers for event files and the frame container.

Three on-disk formats:

``.bin``
    5-byte records: byte 0 is x, byte 1 is y, bit 7 of byte 2 is the
    polarity, and the remaining 23 bits (bits 6..0 of byte 2 followed by
    bytes 3 and 4, big-endian) are the microsecond timestamp.

``.evt.txt``
    a ``# width height duration`` header, then one event per line as
    ``t x y p`` in decimal. Blank lines and further ``#`` comments are
    ignored; writing canonicalizes whitespace.

``.ndaf``
    frame container: magic ``NDAF``, a version byte, four u32
    little-endian dims (T, P, H, W), a dtype code (0 = u8 binarized,
    1 = u16 counts) and the row-major payload.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .events import Event, EventStream, FrameTensor

BIN_RECORD_SIZE = 5
BIN_MAX_TIMESTAMP = 1 << 23  # 23-bit microsecond field
BIN_MAX_COORD = 256  # x and y are single bytes

FRAME_MAGIC = b"NDAF"
FRAME_VERSION = 1
_FRAME_HEADER = struct.Struct("<4sB4IB")
_DTYPE_U8 = 0
_DTYPE_U16 = 1


class FormatError(ValueError):
    """A byte or text payload does not satisfy its format contract."""


@dataclass(frozen=True)
class ParseReport:
    """What a parser saw besides the events themselves."""

    num_records: int
    non_monotonic: int  # records whose timestamp went backwards


def parse_bin_with_report(
    data: bytes, width: int, height: int
) -> tuple[EventStream, ParseReport]:
    """Decode 5-byte records; returns the stream plus a parse report.

    Non-monotonic timestamps are kept (the stream re-sorts stably) but
    counted in the report so callers can surface recording jitter.
    """
    if len(data) % BIN_RECORD_SIZE != 0:
        raise FormatError(
            f"payload of {len(data)} bytes is not a multiple of {BIN_RECORD_SIZE}"
        )
    raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, BIN_RECORD_SIZE)
    x = raw[:, 0].astype(np.int64)
    y = raw[:, 1].astype(np.int64)
    p = (raw[:, 2] >> 7).astype(np.int64)
    t = (
        ((raw[:, 2].astype(np.int64) & 0x7F) << 16)
        | (raw[:, 3].astype(np.int64) << 8)
        | raw[:, 4].astype(np.int64)
    )
    bad = np.nonzero((x >= width) | (y >= height))[0]
    if bad.size:
        i = int(bad[0])
        raise FormatError(
            f"record {i}: position ({x[i]}, {y[i]}) outside {width}x{height} sensor"
        )
    non_monotonic = int(np.sum(np.diff(t) < 0)) if len(t) > 1 else 0
    events = tuple(Event(int(a), int(b), int(c), int(d)) for a, b, c, d in zip(t, x, y, p))
    stream = EventStream(events, width=width, height=height)
    return stream, ParseReport(num_records=len(events), non_monotonic=non_monotonic)


def parse_bin(data: bytes, width: int, height: int) -> EventStream:
    """Decode 5-byte records into an EventStream (stably sorted by t)."""
    stream, _ = parse_bin_with_report(data, width, height)
    return stream


def write_bin(stream: EventStream) -> bytes:
    """Encode a stream as 5-byte records; inverse of :func:`parse_bin`."""
    t, x, y, p = stream.arrays()
    if len(t) and int(t.max()) >= BIN_MAX_TIMESTAMP:
        raise FormatError(
            f"timestamp {int(t.max())} exceeds the 23-bit field "
            f"(max {BIN_MAX_TIMESTAMP - 1})"
        )
    if len(x) and (int(x.max()) >= BIN_MAX_COORD or int(y.max()) >= BIN_MAX_COORD):
        raise FormatError("coordinates above 255 do not fit the single-byte fields")
    raw = np.empty((len(t), BIN_RECORD_SIZE), dtype=np.uint8)
    raw[:, 0] = x
    raw[:, 1] = y
    raw[:, 2] = (p << 7) | ((t >> 16) & 0x7F)
    raw[:, 3] = (t >> 8) & 0xFF
    raw[:, 4] = t & 0xFF
    return raw.tobytes()


def parse_text_events(text: str) -> EventStream:
    """Parse the ``t x y p`` text format; the first ``#`` line is the header."""
    header: tuple[int, int, int] | None = None
    events: list[Event] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if header is None:
                fields = line[1:].split()
                if len(fields) != 3:
                    raise FormatError(
                        f"line {lineno}: header needs 'width height duration', "
                        f"got {line!r}"
                    )
                try:
                    header = (int(fields[0]), int(fields[1]), int(fields[2]))
                except ValueError as exc:
                    raise FormatError(f"line {lineno}: non-integer header field") from exc
            continue
        if header is None:
            raise FormatError(f"line {lineno}: event before the '# width height duration' header")
        fields = line.split()
        if len(fields) != 4:
            raise FormatError(f"line {lineno}: expected 4 fields, got {len(fields)}")
        try:
            t, x, y, p = (int(f) for f in fields)
        except ValueError as exc:
            raise FormatError(f"line {lineno}: non-integer field in {line!r}") from exc
        if p not in (0, 1):
            raise FormatError(f"line {lineno}: polarity {p} not in {{0, 1}}")
        events.append(Event(t, x, y, p))
    if header is None:
        raise FormatError("missing '# width height duration' header")
    width, height, duration = header
    try:
        return EventStream(tuple(events), width=width, height=height, duration=duration)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def write_text_events(stream: EventStream) -> str:
    """Serialize to the canonical text form; inverse of :func:`parse_text_events`."""
    lines = [f"# {stream.width} {stream.height} {stream.duration}"]
    lines.extend(f"{e.t} {e.x} {e.y} {e.p}" for e in stream.events)
    return "\n".join(lines) + "\n"


def write_frames(frames: FrameTensor, dtype: str | None = None) -> bytes:
    """Serialize a FrameTensor to the frame-container format.

    The payload dtype is chosen from the binarized flag (u8 for binarized
    data, u16 for counts) unless overridden. A u8 container only holds
    binarized data, so forcing ``dtype="u8"`` on counts is an error.
    """
    if dtype is None:
        dtype = "u8" if frames.binarized else "u16"
    if dtype not in ("u8", "u16"):
        raise FormatError(f"unknown container dtype {dtype!r}")
    data = frames.data
    peak = int(data.max()) if data.size else 0
    if dtype == "u8":
        if peak > 255:
            raise FormatError(f"count {peak} exceeds the u8 container range")
        if not frames.binarized:
            raise FormatError("u8 container holds binarized data only")
        code, payload = _DTYPE_U8, data.astype("<u1")
    else:
        if peak > 65535:
            raise FormatError(f"count {peak} exceeds the u16 container range")
        code, payload = _DTYPE_U16, data.astype("<u2")
    t, p, h, w = frames.shape
    header = _FRAME_HEADER.pack(FRAME_MAGIC, FRAME_VERSION, t, p, h, w, code)
    return header + payload.tobytes()


def read_frames(data: bytes) -> FrameTensor:
    """Deserialize a frame container; bit-exact inverse of :func:`write_frames`."""
    if len(data) < _FRAME_HEADER.size:
        raise FormatError(f"container of {len(data)} bytes is shorter than the header")
    magic, version, t, p, h, w, code = _FRAME_HEADER.unpack_from(data)
    if magic != FRAME_MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != FRAME_VERSION:
        raise FormatError(f"unsupported container version {version}")
    if code == _DTYPE_U8:
        np_dtype, item = "<u1", 1
    elif code == _DTYPE_U16:
        np_dtype, item = "<u2", 2
    else:
        raise FormatError(f"unknown dtype code {code}")
    expected = _FRAME_HEADER.size + t * p * h * w * item
    if len(data) != expected:
        raise FormatError(
            f"payload length mismatch: header implies {expected} bytes, got {len(data)}"
        )
    payload = np.frombuffer(data, dtype=np_dtype, offset=_FRAME_HEADER.size)
    arr = payload.reshape(t, p, h, w)
    try:
        if code == _DTYPE_U8:
            if arr.size and int(arr.max()) > 1:
                raise FormatError("u8 container payload must be binarized (0/1 entries)")
            return FrameTensor(arr.astype(np.uint8), binarized=True)
        return FrameTensor(arr.astype(np.int32), binarized=False)
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(f"invalid container dims ({t}, {p}, {h}, {w}): {exc}") from exc
