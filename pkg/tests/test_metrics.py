import numpy as np
import pytest
from hypothesis import given, strategies as st

from jpegqt.errors import DimensionMismatch, NoPairs
from jpegqt.image import write_pgm
from jpegqt.metrics import (
    FLAG_DIM_MISMATCH,
    FLAG_EMPTY_BOTH,
    PixelCounts,
    binarize,
    evaluate_set,
    f1_iou,
    fpr_pix,
    pixel_counts,
    read_mask,
)
from jpegqt.probmap import ProbMap, write_probmap


def brute_force_eval(prob, mask, tau):
    """Independent oracle: per-pixel Python loops, no vectorized shortcuts."""
    tp = fp = fn = 0
    h, w = prob.shape
    for i in range(h):
        for j in range(w):
            p = 1 if prob[i][j] >= tau else 0
            g = 1 if mask[i][j] else 0
            tp += p and g
            fp += p and not g
            fn += (not p) and g
    denom = 2 * tp + fp + fn
    f1 = 1.0 if denom == 0 else 2 * tp / denom
    iou = 1.0 if denom == 0 else (tp / (tp + fp + fn) if (tp + fp + fn) else 1.0)
    return tp, fp, fn, f1, iou, fp / (h * w)


class TestBinarize:
    def test_half_map_at_half_tau_all_positive(self):
        pm = ProbMap(np.full((4, 4), 0.5))
        assert binarize(pm, 0.5).all()

    def test_zero_map(self):
        assert not binarize(ProbMap(np.zeros((3, 3))), 0.5).any()

    def test_tau_zero_all_positive(self):
        assert binarize(ProbMap(np.zeros((3, 3))), 0.0).all()

    def test_tau_validated(self):
        with pytest.raises(ValueError):
            binarize(ProbMap(np.zeros((2, 2))), 1.5)


class TestPixelCounts:
    def test_perfect_prediction(self):
        gt = np.zeros((4, 4), bool)
        gt[:2, :2] = True
        c = pixel_counts(gt, gt)
        assert (c.tp, c.fp, c.fn) == (4, 0, 0)

    def test_hand_enumerated_4x4(self):
        gt = np.zeros((4, 4), bool)
        gt[0, 0] = gt[0, 1] = gt[1, 0] = gt[1, 1] = True
        pred = np.zeros((4, 4), bool)
        pred[0, 0] = pred[1, 1] = True      # overlap 2
        pred[3, 2] = pred[3, 3] = True      # 2 extra
        c = pixel_counts(pred, gt)
        assert (c.tp, c.fp, c.fn) == (2, 2, 2)

    def test_all_negative_gt(self):
        gt = np.zeros((3, 3), bool)
        pred = np.zeros((3, 3), bool)
        pred[0, :3] = True
        c = pixel_counts(pred, gt)
        assert (c.tp, c.fp, c.fn) == (0, 3, 0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            pixel_counts(np.zeros((2, 2), bool), np.zeros((2, 3), bool))

    def test_invariants(self):
        rng = np.random.default_rng(0)
        pred = rng.random((8, 8)) > 0.5
        gt = rng.random((8, 8)) > 0.5
        c = pixel_counts(pred, gt)
        assert c.tp + c.fn == gt.sum()
        assert c.tp + c.fp == pred.sum()


class TestF1Iou:
    def test_hand_case(self):
        f1, iou = f1_iou(PixelCounts(2, 2, 2))
        assert f1 == 0.5
        assert iou == pytest.approx(1 / 3)

    def test_perfect(self):
        assert f1_iou(PixelCounts(10, 0, 0)) == (1.0, 1.0)

    def test_zero_tp_with_errors(self):
        assert f1_iou(PixelCounts(0, 3, 2)) == (0.0, 0.0)

    def test_all_zero_defined_as_one(self):
        assert f1_iou(PixelCounts(0, 0, 0)) == (1.0, 1.0)

    @given(st.integers(0, 500), st.integers(0, 500), st.integers(0, 500))
    def test_f1_iou_algebraic_identity(self, tp, fp, fn):
        f1, iou = f1_iou(PixelCounts(tp, fp, fn))
        assert f1 == pytest.approx(2 * iou / (1 + iou))
        assert iou <= f1 + 1e-12


class TestFpr:
    def test_all_zero(self):
        assert fpr_pix(np.zeros((5, 5), bool)) == 0.0

    def test_three_of_sixteen(self):
        pred = np.zeros((4, 4), bool)
        pred[0, 0] = pred[1, 2] = pred[3, 3] = True
        assert fpr_pix(pred) == 0.1875

    def test_all_ones(self):
        assert fpr_pix(np.ones((7, 3), bool)) == 1.0

    @given(st.integers(0, 1000))
    def test_consistent_with_pixel_counts(self, seed):
        rng = np.random.default_rng(seed)
        pred = rng.random((6, 9)) > 0.4
        gt = np.zeros((6, 9), bool)
        c = pixel_counts(pred, gt)
        assert fpr_pix(pred) == c.fp / pred.size


class TestEvaluateSet:
    def write_pair(self, pred_dir, gt_dir, stem, prob, mask):
        write_probmap(pred_dir / f"{stem}.pgm", ProbMap(prob))
        write_pgm(gt_dir / f"{stem}.pgm", np.where(mask, 255, 0).astype(np.uint8))

    def test_mean_is_arithmetic(self, tmp_path):
        pred, gt = tmp_path / "pred", tmp_path / "gt"
        pred.mkdir(), gt.mkdir()
        # one image at f1=0.4 is hard to pin exactly; use easy 1.0 and 0.0 pair
        mask = np.zeros((4, 4), bool)
        mask[0, 0] = True
        perfect = np.where(mask, 1.0, 0.0)
        self.write_pair(pred, gt, "a", perfect, mask)           # f1 = 1
        self.write_pair(pred, gt, "b", 1.0 - perfect, mask)     # f1 = 0
        report = evaluate_set(pred, gt, tau=0.5, condition="orig")
        assert report.mean_f1 == pytest.approx(0.5)

    def test_matches_brute_force_oracle(self, tmp_path):
        rng = np.random.default_rng(99)
        pred, gt = tmp_path / "pred", tmp_path / "gt"
        pred.mkdir(), gt.mkdir()
        expected = {}
        for i in range(20):
            h, w = int(rng.integers(1, 64)), int(rng.integers(1, 64))
            # Quantize to the PGM-16 grid so disk and memory agree exactly.
            prob = np.rint(rng.random((h, w)) * 65535) / 65535
            mask = rng.random((h, w)) > 0.6
            stem = f"img{i:02d}"
            self.write_pair(pred, gt, stem, prob, mask)
            expected[stem] = brute_force_eval(prob, mask, 0.5)
        report = evaluate_set(pred, gt, tau=0.5, condition="x")
        assert len(report.rows) == 20
        for row in report.rows:
            tp, fp, fn, f1, iou, fpr = expected[row.image_id]
            assert (row.tp, row.fp, row.fn) == (tp, fp, fn)
            assert row.f1 == pytest.approx(f1, abs=1e-12)
            assert row.iou == pytest.approx(iou, abs=1e-12)
            assert row.fpr == pytest.approx(fpr, abs=1e-12)
        assert report.mean_f1 == pytest.approx(
            np.mean([expected[r.image_id][3] for r in report.rows]), abs=1e-12)

    def test_unaltered_mode(self, tmp_path):
        pred = tmp_path / "pred"
        pred.mkdir()
        write_probmap(pred / "a.pgm", ProbMap(np.full((4, 4), 0.6)))
        write_probmap(pred / "b.pgm", ProbMap(np.zeros((4, 4))))
        report = evaluate_set(pred, unaltered=True, tau=0.5, condition="orig")
        assert report.mode == "unaltered"
        assert all(r.f1 is None and r.iou is None for r in report.rows)
        assert report.mean_fpr == pytest.approx(0.5)
        assert report.mean_f1 is None

    def test_unmatched_reported_and_excluded(self, tmp_path):
        pred, gt = tmp_path / "pred", tmp_path / "gt"
        pred.mkdir(), gt.mkdir()
        mask = np.zeros((3, 3), bool)
        self.write_pair(pred, gt, "both", np.zeros((3, 3)), mask)
        write_probmap(pred / "only_pred.pgm", ProbMap(np.zeros((3, 3))))
        write_pgm(gt / "only_gt.pgm", np.zeros((3, 3), np.uint8))
        report = evaluate_set(pred, gt, condition="c")
        assert report.unmatched_pred == ["only_pred"]
        assert report.unmatched_gt == ["only_gt"]
        assert [r.image_id for r in report.rows] == ["both"]

    def test_dimension_mismatch_flagged_run_continues(self, tmp_path):
        pred, gt = tmp_path / "pred", tmp_path / "gt"
        pred.mkdir(), gt.mkdir()
        mask = np.ones((4, 4), bool)
        self.write_pair(pred, gt, "good", np.ones((4, 4)), mask)
        write_probmap(pred / "badpair.pgm", ProbMap(np.zeros((4, 4))))
        write_pgm(gt / "badpair.pgm", np.zeros((5, 5), np.uint8))
        report = evaluate_set(pred, gt, condition="c")
        flagged = [r for r in report.rows if r.flags == FLAG_DIM_MISMATCH]
        assert len(flagged) == 1 and flagged[0].image_id == "badpair"
        assert report.mean_f1 == 1.0

    def test_empty_both_flagged_as_one(self, tmp_path):
        pred, gt = tmp_path / "pred", tmp_path / "gt"
        pred.mkdir(), gt.mkdir()
        self.write_pair(pred, gt, "e", np.zeros((3, 3)), np.zeros((3, 3), bool))
        report = evaluate_set(pred, gt, condition="c")
        assert report.rows[0].flags == FLAG_EMPTY_BOTH
        assert report.rows[0].f1 == 1.0 and report.rows[0].iou == 1.0

    def test_no_pairs(self, tmp_path):
        pred, gt = tmp_path / "pred", tmp_path / "gt"
        pred.mkdir(), gt.mkdir()
        write_probmap(pred / "a.pgm", ProbMap(np.zeros((2, 2))))
        write_pgm(gt / "b.pgm", np.zeros((2, 2), np.uint8))
        with pytest.raises(NoPairs):
            evaluate_set(pred, gt, condition="c")

    def test_order_invariance(self, tmp_path):
        rng = np.random.default_rng(5)
        pred, gt = tmp_path / "pred", tmp_path / "gt"
        pred.mkdir(), gt.mkdir()
        for i in range(6):
            prob = np.rint(rng.random((8, 8)) * 65535) / 65535
            self.write_pair(pred, gt, f"n{i}", prob, rng.random((8, 8)) > 0.5)
        a = evaluate_set(pred, gt, condition="c").to_csv()
        b = evaluate_set(pred, gt, condition="c").to_csv()
        assert a == b


def test_mask_binarizes_at_128(tmp_path):
    arr = np.array([[0, 127, 128, 255]], dtype=np.uint8)
    write_pgm(tmp_path / "m.pgm", arr)
    assert read_mask(tmp_path / "m.pgm").tolist() == [[False, False, True, True]]
