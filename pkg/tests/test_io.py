import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evaug import (
    Event,
    EventStream,
    FormatError,
    FrameTensor,
    parse_bin,
    parse_bin_with_report,
    parse_text_events,
    read_frames,
    write_bin,
    write_frames,
    write_text_events,
)

HAND_RECORD = bytes([0x03, 0x02, 0x80, 0x00, 0x0A])


@st.composite
def streams(draw):
    width = draw(st.integers(1, 64))
    height = draw(st.integers(1, 64))
    events = draw(
        st.lists(
            st.tuples(
                st.integers(0, 2**23 - 1),
                st.integers(0, width - 1),
                st.integers(0, height - 1),
                st.integers(0, 1),
            ),
            max_size=60,
        )
    )
    return EventStream(tuple(Event(*e) for e in events), width=width, height=height)


class TestBinFormat:
    def test_hand_decoded_record(self):
        # Decoded by hand from the record layout: x=0x03, y=0x02,
        # byte2=0x80 -> polarity bit set, timestamp 0x00000A = 10 us.
        s = parse_bin(HAND_RECORD, 34, 34)
        assert s.events == (Event(t=10, x=3, y=2, p=1),)

    def test_polarity_bit_clear(self):
        s = parse_bin(bytes([0x03, 0x02, 0x00, 0x00, 0x0A]), 34, 34)
        assert s.events == (Event(t=10, x=3, y=2, p=0),)

    def test_partial_record_rejected(self):
        with pytest.raises(FormatError, match="multiple of 5"):
            parse_bin(b"\x00" * 6, 34, 34)

    def test_out_of_bounds_rejected(self):
        with pytest.raises(FormatError, match="outside"):
            parse_bin(bytes([40, 0, 0, 0, 0]), 34, 34)

    def test_non_monotonic_reported_not_rejected(self):
        late = write_bin(EventStream((Event(9, 0, 0, 1),), width=4, height=4))
        early = write_bin(EventStream((Event(2, 1, 0, 0),), width=4, height=4))
        stream, report = parse_bin_with_report(late + early, 4, 4)
        assert report.num_records == 2 and report.non_monotonic == 1
        assert [e.t for e in stream.events] == [2, 9]

    def test_write_is_inverse_of_hand_decode(self):
        s = EventStream((Event(10, 3, 2, 1),), width=34, height=34)
        assert write_bin(s) == HAND_RECORD

    def test_timestamp_overflow(self):
        s = EventStream((Event(2**23, 0, 0, 1),), width=4, height=4)
        with pytest.raises(FormatError, match="23-bit"):
            write_bin(s)

    def test_coordinate_overflow(self):
        s = EventStream((Event(1, 300, 0, 1),), width=512, height=4)
        with pytest.raises(FormatError, match="single-byte"):
            write_bin(s)

    @settings(deadline=None)
    @given(streams())
    def test_round_trip(self, stream):
        data = write_bin(stream)
        again = parse_bin(data, stream.width, stream.height)
        assert again.events == stream.events
        assert write_bin(again) == data


class TestTextFormat:
    def test_basic_parse(self):
        s = parse_text_events("# 4 4 100\n10 3 2 1\n")
        assert s.width == 4 and s.height == 4 and s.duration == 100
        assert s.events == (Event(10, 3, 2, 1),)

    def test_tolerates_blanks_and_comments(self):
        text = "\n# 8 8 50\n# a comment\n\n1 2 3 0\n\n# trailing\n"
        s = parse_text_events(text)
        assert s.events == (Event(1, 2, 3, 0),)

    def test_polarity_error(self):
        with pytest.raises(FormatError, match="polarity"):
            parse_text_events("# 8 8 50\n10 3 2 7\n")

    def test_malformed_field(self):
        with pytest.raises(FormatError, match="non-integer"):
            parse_text_events("# 8 8 50\n10 3 x 1\n")

    def test_missing_header(self):
        with pytest.raises(FormatError, match="header"):
            parse_text_events("10 3 2 1\n")

    def test_write_canonicalizes(self):
        messy = "# 8 8 50\n\n# note\n1   2  3   0\n"
        canon = write_text_events(parse_text_events(messy))
        assert canon == "# 8 8 50\n1 2 3 0\n"

    @settings(deadline=None)
    @given(streams())
    def test_round_trip(self, stream):
        text = write_text_events(stream)
        again = parse_text_events(text)
        assert again == stream
        assert write_text_events(again) == text


class TestFrameContainer:
    def test_round_trip_counts(self):
        rng = np.random.default_rng(2)
        data = rng.integers(0, 301, (10, 2, 48, 48)).astype(np.int32)
        t = FrameTensor(data)
        again = read_frames(write_frames(t))
        assert np.array_equal(again.data, data)
        assert not again.binarized

    def test_round_trip_binarized(self):
        rng = np.random.default_rng(4)
        data = rng.integers(0, 2, (3, 2, 16, 16)).astype(np.uint8)
        t = FrameTensor(data, binarized=True)
        blob = write_frames(t)
        again = read_frames(blob)
        assert again.binarized and np.array_equal(again.data, data)
        assert write_frames(again) == blob

    def test_corrupted_magic(self):
        blob = bytearray(write_frames(FrameTensor(np.zeros((1, 2, 2, 2), np.int32))))
        blob[0] = ord(b"X")
        with pytest.raises(FormatError, match="magic"):
            read_frames(bytes(blob))

    def test_payload_length_mismatch(self):
        blob = write_frames(FrameTensor(np.zeros((1, 2, 2, 2), np.int32)))
        with pytest.raises(FormatError, match="length"):
            read_frames(blob[:-1])

    def test_unknown_dtype_code(self):
        blob = bytearray(write_frames(FrameTensor(np.zeros((1, 2, 2, 2), np.int32))))
        blob[21] = 9  # dtype code byte
        with pytest.raises(FormatError, match="dtype"):
            read_frames(bytes(blob))

    def test_u16_count_survives(self):
        data = np.full((1, 2, 2, 2), 300, np.int32)
        again = read_frames(write_frames(FrameTensor(data)))
        assert int(again.data.max()) == 300

    def test_u8_container_rejects_large_counts(self):
        data = np.full((1, 2, 2, 2), 300, np.int32)
        with pytest.raises(FormatError, match="u8"):
            write_frames(FrameTensor(data), dtype="u8")

    def test_u8_container_requires_binarized(self):
        data = np.full((1, 2, 2, 2), 3, np.int32)
        with pytest.raises(FormatError, match="binarized"):
            write_frames(FrameTensor(data), dtype="u8")

    def test_counts_above_u16_rejected(self):
        data = np.full((1, 2, 2, 2), 70_000, np.int64)
        with pytest.raises(FormatError, match="u16"):
            write_frames(FrameTensor(data))

    @settings(deadline=None, max_examples=60)
    @given(
        st.integers(1, 4),
        st.integers(1, 12),
        st.integers(1, 12),
        st.booleans(),
        st.integers(0, 2**32 - 1),
    )
    def test_round_trip_property(self, t_bins, h, w, binarized, seed):
        rng = np.random.default_rng(seed)
        if binarized:
            data = rng.integers(0, 2, (t_bins, 2, h, w)).astype(np.uint8)
        else:
            data = rng.integers(0, 400, (t_bins, 2, h, w)).astype(np.int32)
        t = FrameTensor(data, binarized=binarized)
        blob = write_frames(t)
        again = read_frames(blob)
        assert np.array_equal(again.data, t.data)
        assert again.binarized == binarized
        assert write_frames(again) == blob
