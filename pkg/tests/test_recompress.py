import os

import numpy as np
import pytest

from jpegqt.bank import FileRecord, merge_records
from jpegqt.errors import EmptyBank, UnreadableRoot
from jpegqt.fixtures import make_corpus, synth_image
from jpegqt.image import save_image
from jpegqt.parse import luminance_table
from jpegqt.qtables import LUMINANCE, fingerprint, is_standard, standard_table
from jpegqt.recompress import (
    PipelineSpec,
    load_source,
    materialize_condition,
    recompress_real,
    recompress_standard,
    write_manifest,
)
from jpegqt.rng import SplitMix64, per_file_seed

from tests.conftest import encode_std


@pytest.fixture
def small_bank():
    records = [FileRecord(f"b{i}.jpg", table=standard_table(q))
               for i, q in enumerate((44, 61, 79, 92))]
    return merge_records(records)


@pytest.fixture
def jpeg_bytes():
    return encode_std(synth_image(40, 40, seed=21, color=False), 75, "444")


class TestStandardPipeline:
    def test_deterministic(self, jpeg_bytes):
        spec = PipelineSpec(kind="std", master_seed=7)
        a = recompress_standard(jpeg_bytes, 123, spec)
        b = recompress_standard(jpeg_bytes, 123, spec)
        assert a == b

    def test_degenerate_range_pins_quality(self, jpeg_bytes):
        spec = PipelineSpec(kind="std", qf_low=75, qf_high=75)
        out, q = recompress_standard(jpeg_bytes, 5, spec)
        assert q == 75
        assert luminance_table(out).values == standard_table(75).values

    def test_uniform_draws_cover_range_with_mean_near_65(self):
        spec = PipelineSpec(kind="std", qf_low=30, qf_high=100)
        rng = SplitMix64(2024)
        draws = [rng.randint(spec.qf_low, spec.qf_high) for _ in range(10000)]
        assert min(draws) >= 30 and max(draws) <= 100
        assert 30 in draws and 100 in draws
        assert 63 <= np.mean(draws) <= 67

    def test_output_is_standard_in_range(self, jpeg_bytes):
        spec = PipelineSpec(kind="std", qf_low=30, qf_high=100)
        for seed in range(12):
            out, q = recompress_standard(jpeg_bytes, seed, spec)
            q_found = is_standard(luminance_table(out), LUMINANCE)
            assert q_found is not None and 30 <= q <= 100
            assert standard_table(q_found).values == standard_table(q).values


class TestRealPipeline:
    def test_singleton_bank_always_that_table(self, jpeg_bytes):
        bank = merge_records([FileRecord("only.jpg", table=standard_table(58))])
        spec = PipelineSpec(kind="real")
        for seed in range(5):
            out, fp = recompress_real(jpeg_bytes, seed, spec, bank)
            assert fp == bank.entries[0].fingerprint
            assert luminance_table(out).values == standard_table(58).values

    def test_fingerprint_membership(self, jpeg_bytes, small_bank):
        spec = PipelineSpec(kind="real")
        members = small_bank.fingerprints()
        for seed in range(25):
            out, fp = recompress_real(jpeg_bytes, seed, spec, small_bank)
            assert fp in members
            assert fingerprint(luminance_table(out)) == fp

    def test_same_seed_same_choice(self, jpeg_bytes, small_bank):
        spec = PipelineSpec(kind="real")
        a = recompress_real(jpeg_bytes, 99, spec, small_bank)
        b = recompress_real(jpeg_bytes, 99, spec, small_bank)
        assert a == b

    def test_empty_bank_rejected(self, tmp_path, small_bank):
        make_corpus(tmp_path / "in", 2, seed=1, nested=False)
        with pytest.raises(EmptyBank):
            materialize_condition(tmp_path / "in", tmp_path / "out",
                                  PipelineSpec(kind="real"), bank=None)

    def test_16bit_table_carried_bit_exact(self, jpeg_bytes):
        from jpegqt.codec import decode
        from jpegqt.qtables import QuantTable

        big = QuantTable(tuple(v * 4 for v in range(1, 65)), precision=16)
        bank = merge_records([FileRecord("t.jpg", table=big)])
        out, fp = recompress_real(jpeg_bytes, 7, PipelineSpec(kind="real"), bank)
        got = luminance_table(out)
        assert got == big and got.precision == 16
        assert fingerprint(got) == fp
        decode(out)  # stream stays decodable


class TestLoadSource:
    def test_png(self, jpeg_bytes):
        import io

        from PIL import Image

        img = synth_image(20, 24, seed=9, color=True)
        buf = io.BytesIO()
        Image.fromarray(img.pixels, "RGB").save(buf, "PNG")
        loaded = load_source(buf.getvalue())
        assert np.array_equal(loaded.pixels, img.pixels)

    def test_pnm(self, tmp_path):
        img = synth_image(12, 10, seed=3, color=False)
        save_image(tmp_path / "x.pgm", img)
        loaded = load_source((tmp_path / "x.pgm").read_bytes())
        assert np.array_equal(loaded.pixels, img.pixels)


class TestMaterialize:
    def fill_tree(self, root, n=5):
        make_corpus(root, n, seed=11, nested=True)

    def test_orig_is_byte_identity(self, tmp_path):
        self.fill_tree(tmp_path / "in")
        manifest = materialize_condition(tmp_path / "in", tmp_path / "out",
                                         PipelineSpec(kind="orig"))
        assert all(r.condition == "orig" and not r.error for r in manifest.rows)
        for row in manifest.rows:
            src = (tmp_path / "in" / row.input).read_bytes()
            dst = (tmp_path / "out" / row.output).read_bytes()
            assert src == dst

    def test_std_rerun_identical(self, tmp_path):
        self.fill_tree(tmp_path / "in", n=3)
        spec = PipelineSpec(kind="std", master_seed=42)
        m1 = materialize_condition(tmp_path / "in", tmp_path / "out1", spec)
        m2 = materialize_condition(tmp_path / "in", tmp_path / "out2", spec)
        assert m1.to_csv() == m2.to_csv()
        for row in m1.rows:
            assert (tmp_path / "out1" / row.output).read_bytes() == \
                (tmp_path / "out2" / row.output).read_bytes()

    def test_thread_count_does_not_change_bytes(self, tmp_path):
        self.fill_tree(tmp_path / "in", n=6)
        spec = PipelineSpec(kind="std", master_seed=4)
        m1 = materialize_condition(tmp_path / "in", tmp_path / "o1", spec, threads=1)
        m4 = materialize_condition(tmp_path / "in", tmp_path / "o4", spec, threads=4)
        assert m1.to_csv() == m4.to_csv()

    def test_corrupt_file_becomes_error_row(self, tmp_path):
        self.fill_tree(tmp_path / "in", n=5)
        bad = tmp_path / "in" / "broken.jpg"
        bad.write_bytes(b"\xff\xd8\xff\xc2" + b"\x00\x08" + b"\x08\x00\x10\x00\x10\x00" + b"\xff\xd9")
        spec = PipelineSpec(kind="std", master_seed=8)
        manifest = materialize_condition(tmp_path / "in", tmp_path / "out", spec)
        errors = [r for r in manifest.rows if r.error]
        ok = [r for r in manifest.rows if not r.error]
        assert len(errors) == 1 and errors[0].input == "broken.jpg"
        assert len(ok) == 5

    def test_per_file_seed_ignores_siblings(self, tmp_path):
        self.fill_tree(tmp_path / "in", n=3)
        spec = PipelineSpec(kind="std", master_seed=10)
        m1 = materialize_condition(tmp_path / "in", tmp_path / "o1", spec)
        # Add an unrelated file and re-run: existing outputs must not move.
        img = synth_image(16, 16, seed=404, color=False)
        (tmp_path / "in" / "zzz_extra.jpg").write_bytes(encode_std(img, 60, "444"))
        m2 = materialize_condition(tmp_path / "in", tmp_path / "o2", spec)
        outputs1 = {r.input: r for r in m1.rows}
        for row in m2.rows:
            if row.input == "zzz_extra.jpg":
                continue
            assert row.seed == outputs1[row.input].seed
            assert (tmp_path / "o1" / row.output).read_bytes() == \
                (tmp_path / "o2" / row.output).read_bytes()

    def test_real_closure(self, tmp_path, small_bank):
        self.fill_tree(tmp_path / "in", n=4)
        spec = PipelineSpec(kind="real", master_seed=3)
        manifest = materialize_condition(tmp_path / "in", tmp_path / "out", spec,
                                         bank=small_bank)
        members = small_bank.fingerprints()
        for row in manifest.rows:
            assert not row.error
            data = (tmp_path / "out" / row.output).read_bytes()
            assert fingerprint(luminance_table(data)) in members
            assert row.parameter in members

    def test_unreadable_root(self, tmp_path):
        with pytest.raises(UnreadableRoot):
            materialize_condition(tmp_path / "nope", tmp_path / "out",
                                  PipelineSpec(kind="orig"))

    def test_output_name_collision_becomes_error_row(self, tmp_path):
        import io

        from PIL import Image

        src = tmp_path / "in"
        src.mkdir()
        img = synth_image(16, 16, seed=500, color=False)
        (src / "a.jpg").write_bytes(encode_std(img, 70, "444"))
        buf = io.BytesIO()
        Image.fromarray(img.pixels, "L").save(buf, "PNG")
        (src / "a.png").write_bytes(buf.getvalue())
        manifest = materialize_condition(src, tmp_path / "out",
                                         PipelineSpec(kind="std", master_seed=2))
        ok = [r for r in manifest.rows if not r.error]
        bad = [r for r in manifest.rows if r.error]
        assert len(ok) == 1 and len(bad) == 1
        assert "collides" in bad[0].error
        # orig keeps both: original names never collide
        manifest = materialize_condition(src, tmp_path / "out2",
                                         PipelineSpec(kind="orig"))
        assert not any(r.error for r in manifest.rows)
        assert len(manifest.rows) == 2

    def test_manifest_format(self, tmp_path):
        self.fill_tree(tmp_path / "in", n=2)
        spec = PipelineSpec(kind="std", master_seed=1)
        manifest = materialize_condition(tmp_path / "in", tmp_path / "out", spec)
        write_manifest(manifest, tmp_path / "m.csv")
        lines = (tmp_path / "m.csv").read_text().splitlines()
        header_lines = [l for l in lines if l.startswith("#")]
        assert any(l.startswith("# toolkit=jpegqt") for l in header_lines)
        assert any(l == "# master_seed=1" for l in header_lines)
        body = [l for l in lines if not l.startswith("#")]
        assert body[0] == "input,output,condition,parameter,seed,error"
        assert len(body) == 1 + len(manifest.rows)
        inputs = [l.split(",")[0] for l in body[1:]]
        assert inputs == sorted(inputs)


def test_per_file_seed_stability():
    assert per_file_seed(42, "a/b.jpg") == per_file_seed(42, "a\\b.jpg")
    assert per_file_seed(42, "a.jpg") != per_file_seed(43, "a.jpg")
    assert per_file_seed(42, "a.jpg") != per_file_seed(42, "b.jpg")


def test_pipeline_spec_validation():
    with pytest.raises(ValueError):
        PipelineSpec(kind="nope")
    with pytest.raises(ValueError):
        PipelineSpec(kind="std", qf_low=80, qf_high=30)
    with pytest.raises(ValueError):
        PipelineSpec(kind="real", weighting="wat")
