import os

import pytest
from hypothesis import given, settings, strategies as st

from jpegqt import parse
from jpegqt.errors import (
    InvalidPrecision,
    MissingSoi,
    NoFrameHeader,
    ToolkitError,
    TruncatedSegment,
)
from jpegqt.fixtures import synth_image
from jpegqt.qtables import LUMINANCE, natural_to_zigzag, standard_table

from tests.conftest import encode_std

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


def minimal_jpeg(quality=85, size=(16, 8)):
    """Encoder output with the APP0 segment spliced out: SOI, DQT, SOF0, DHT, SOS, EOI."""
    img = synth_image(size[0], size[1], seed=5, color=False)
    data = encode_std(img, quality, "444")
    smap = parse.scan_segments(data)
    app0 = smap.first(0xE0)
    assert app0 is not None
    return data[:app0.offset] + data[app0.payload_start + app0.length:]


class TestScanSegments:
    def test_minimal_fixture_six_segments(self):
        data = minimal_jpeg()
        smap = parse.scan_segments(data)
        markers = [seg.marker for seg in smap.segments]
        assert markers == [parse.SOI, parse.DQT, 0xC0, parse.DHT, parse.SOS, parse.EOI]
        assert smap.has_sof0 and not smap.has_sof2 and not smap.truncated

    def test_offsets_strictly_increasing(self):
        smap = parse.scan_segments(minimal_jpeg())
        offsets = [seg.offset for seg in smap.segments]
        assert offsets == sorted(set(offsets))

    def test_missing_soi(self):
        with pytest.raises(MissingSoi):
            parse.scan_segments(b"\x89PNG\r\n\x1a\n" + b"\x00" * 64)

    def test_truncated_mid_dqt_keeps_prior_segments(self):
        data = minimal_jpeg()
        dqt = parse.scan_segments(data).first(parse.DQT)
        cut = data[:dqt.payload_start + 10]
        with pytest.raises(TruncatedSegment) as exc:
            parse.scan_segments(cut)
        partial = exc.value.segment_map
        assert partial.truncated
        assert [seg.marker for seg in partial.segments] == [parse.SOI]

    @settings(max_examples=300, deadline=None)
    @given(st.binary(max_size=400))
    def test_fuzz_never_uncontrolled(self, blob):
        try:
            parse.scan_segments(blob)
        except ToolkitError:
            pass

    @settings(max_examples=100, deadline=None)
    @given(st.binary(max_size=300))
    def test_fuzz_with_soi_prefix(self, tail):
        try:
            parse.scan_segments(b"\xff\xd8" + tail)
        except ToolkitError:
            pass


class TestExtractDqt:
    def test_encode_roundtrip_bit_exact(self):
        table = standard_table(85, LUMINANCE)
        img = synth_image(24, 24, seed=6, color=False)
        records = parse.extract_dqt(encode_std(img, 85, "444"))
        assert len(records) == 1
        assert records[0].table.values == table.values
        assert records[0].table_id == 0
        assert records[0].precision == 8
        assert records[0].table.role == LUMINANCE

    def test_two_tables_one_segment(self):
        # Hand-built DQT payload: id 0 (8-bit) then id 1 (8-bit).
        lum = standard_table(70, LUMINANCE)
        chroma = standard_table(70, "chrominance")
        payload = bytes([0x00]) + bytes(natural_to_zigzag(lum.values)) \
            + bytes([0x01]) + bytes(natural_to_zigzag(chroma.values))
        segment = b"\xff\xdb" + (len(payload) + 2).to_bytes(2, "big") + payload
        data = b"\xff\xd8" + segment + b"\xff\xd9"
        records = parse.extract_dqt(data)
        assert len(records) == 2
        assert records[0].segment_offset == records[1].segment_offset == 2
        assert records[0].table.values == lum.values
        assert records[1].table.values == chroma.values

    def test_16bit_table(self):
        values = tuple(range(300, 364))
        zz = natural_to_zigzag(values)
        payload = bytes([0x10]) + b"".join(v.to_bytes(2, "big") for v in zz)
        segment = b"\xff\xdb" + (len(payload) + 2).to_bytes(2, "big") + payload
        records = parse.extract_dqt(b"\xff\xd8" + segment + b"\xff\xd9")
        assert records[0].precision == 16
        assert records[0].table.values == values

    def test_invalid_precision_nibble(self):
        payload = bytes([0x20]) + bytes(64)
        segment = b"\xff\xdb" + (len(payload) + 2).to_bytes(2, "big") + payload
        with pytest.raises(InvalidPrecision):
            parse.extract_dqt(b"\xff\xd8" + segment + b"\xff\xd9")

    def test_pure_function_of_bytes(self):
        data = minimal_jpeg()
        assert parse.extract_dqt(data) == parse.extract_dqt(bytes(data))

    def test_color_roles_from_frame_binding(self):
        img = synth_image(32, 24, seed=7, color=True)
        records = parse.extract_dqt(encode_std(img, 75, "420"))
        roles = {rec.table_id: rec.table.role for rec in records}
        assert roles[0] == LUMINANCE
        assert roles[1] == "chrominance"

    def test_last_pre_sos_definition_wins(self):
        data = minimal_jpeg(quality=60)
        smap = parse.scan_segments(data)
        dqt = smap.first(parse.DQT)
        other = standard_table(95, LUMINANCE)
        payload = bytes([0x00]) + bytes(natural_to_zigzag(other.values))
        extra = b"\xff\xdb" + (len(payload) + 2).to_bytes(2, "big") + payload
        # Redefinition after the first DQT, before SOF.
        spliced = data[:dqt.offset] + extra + data[dqt.offset:]
        records = parse.extract_dqt(spliced)
        assert len(records) == 2
        assert parse.luminance_table(spliced).values == standard_table(60).values


class TestFrameInfo:
    def test_grayscale_16x8(self):
        img = synth_image(16, 8, seed=8, color=False)
        info = parse.extract_frame_info(encode_std(img, 75, "444"))
        assert (info.width, info.height) == (16, 8)
        assert info.n_components == 1
        assert info.bit_depth == 8
        assert not info.progressive

    def test_progressive_sample(self):
        data = open(os.path.join(DATA_DIR, "progressive.jpg"), "rb").read()
        info = parse.extract_frame_info(data)
        assert info.progressive
        assert info.frame_marker == 0xC2
        assert (info.width, info.height) == (64, 48)
        # Header-only extraction still reads the tables.
        assert parse.extract_dqt(data)

    def test_color_sampling_factors(self):
        img = synth_image(20, 20, seed=9, color=True)
        info = parse.extract_frame_info(encode_std(img, 75, "420"))
        assert info.components[0][1:3] == (2, 2)
        assert info.components[1][1:3] == (1, 1)

    def test_png_bytes_raise_missing_soi(self):
        with pytest.raises(MissingSoi):
            parse.extract_frame_info(b"\x89PNG\r\n\x1a\n\x00\x00\x00\rIHDR")

    def test_no_frame_header(self):
        data = b"\xff\xd8\xff\xd9"
        with pytest.raises(NoFrameHeader):
            parse.extract_frame_info(data)


def test_luminance_table_requires_tables():
    with pytest.raises(NoFrameHeader):
        parse.luminance_table(b"\xff\xd8\xff\xd9")
