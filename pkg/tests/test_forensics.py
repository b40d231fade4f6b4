import numpy as np

from jpegqt.codec import decode_to_coefficients
from jpegqt.fixtures import (
    double_pairs,
    make_double_half,
    make_ela_splice,
    synth_image,
)
from jpegqt.forensics import (
    coefficient_histograms,
    dq_block_scores,
    dq_localization_map,
    dq_scores_from_coefficients,
    ela_map,
)
from jpegqt.image import GRAYSCALE, PixelImage
from jpegqt.qtables import standard_table, zigzag_order

from tests.conftest import encode_std, rank_auc


class TestEla:
    def test_self_resave_mean_low(self):
        img = synth_image(120, 120, seed=61, color=False)
        data = encode_std(img, 75, "444")
        pm = ela_map(data, 75)
        assert pm.values.mean() < 0.15

    def test_dimensions_match(self):
        img = synth_image(52, 36, seed=62, color=True)
        pm = ela_map(encode_std(img, 80, "420"))
        assert pm.values.shape == (36, 52)

    def test_range(self):
        img = synth_image(64, 64, seed=63, color=False)
        pm = ela_map(encode_std(img, 60, "444"))
        assert pm.values.min() >= 0.0 and pm.values.max() <= 1.0

    def test_splice_patch_brighter_than_host(self):
        fx = make_ela_splice(seed=64)
        pm = ela_map(fx.data)
        assert pm.values[fx.patch_mask].mean() > pm.values[~fx.patch_mask].mean()


class TestCoefficientHistograms:
    def test_counts_sum_to_blocks(self):
        img = synth_image(48, 40, seed=65, color=False)
        hist = coefficient_histograms(encode_std(img, 70, "444"))
        assert hist.n_blocks == 6 * 5
        for f in range(64):
            assert sum(hist.counts[f].values()) == hist.n_blocks

    def test_single_compression_lattice(self):
        img = synth_image(64, 64, seed=66, color=False)
        q = 50
        hist = coefficient_histograms(encode_std(img, q, "444"))
        steps = standard_table(q).values
        for f in range(64):
            for value in hist.counts[f]:
                assert value % steps[f] == 0

    def test_flat_image_ac_mass_at_zero(self):
        img = PixelImage(np.full((32, 32), 180, np.uint8), GRAYSCALE)
        hist = coefficient_histograms(encode_std(img, 75, "444"))
        for f in range(1, 64):
            assert set(hist.counts[f]) == {0}

    def test_double_compression_shows_gaps(self):
        # Primary step double the final step: odd multiples of the final
        # step stay (nearly) empty in the double-compressed histogram.
        img = synth_image(160, 160, seed=67, color=False)
        from jpegqt.codec import decode

        once = encode_std(img, 44, "444")
        twice = encode_std(decode(once), 72, "444")
        hist = coefficient_histograms(twice)
        f = zigzag_order()[1]
        s2 = standard_table(72).values[f]
        s1 = standard_table(44).values[f]
        assert s1 == 2 * s2
        counts = hist.counts[f]
        on_lattice = sum(c for v, c in counts.items() if v != 0 and v % s1 == 0)
        off_lattice = sum(c for v, c in counts.items() if v != 0 and v % s1 != 0)
        assert on_lattice > 5 * off_lattice


class TestDqScores:
    def test_grid_dimensions(self):
        img = synth_image(100, 52, seed=68, color=False)
        scores = dq_block_scores(encode_std(img, 75, "444"))
        assert scores.grid.shape == (np.ceil(52 / 8), np.ceil(100 / 8))

    def test_map_range_and_block_constancy(self):
        fx = make_double_half(seed=69, q1=60, q2=90)
        pm = dq_localization_map(fx.data)
        assert pm.values.shape == fx.mask.shape
        assert pm.values.min() >= 0.0 and pm.values.max() <= 1.0
        # Every pixel inside one 8x8 block shares the block's value.
        for by, bx in ((0, 0), (3, 7), (10, 12)):
            tile = pm.values[by * 8:(by + 1) * 8, bx * 8:(bx + 1) * 8]
            assert np.unique(tile).size == 1

    def test_half_fixture_separates(self):
        fx = make_double_half(seed=70, q1=60, q2=90)
        pm = dq_localization_map(fx.data)
        assert rank_auc(pm.values, fx.mask) > 0.7
        pred = pm.values >= 0.5
        tp = (pred & fx.mask).sum()
        fp = (pred & ~fx.mask).sum()
        fn = (~pred & fx.mask).sum()
        assert 2 * tp / (2 * tp + fp + fn) > 0.5

    def test_single_compressed_low_variance(self):
        for q, seed in ((55, 71), (70, 72), (85, 73), (95, 74)):
            img = synth_image(160, 160, seed=seed, color=False)
            scores = dq_scores_from_coefficients(
                decode_to_coefficients(encode_std(img, q, "444")))
            assert scores.grid.std() < 0.2, (q, seed, scores.grid.std())

    def test_flat_image_degenerate_zero_map(self):
        img = PixelImage(np.full((64, 64), 200, np.uint8), GRAYSCALE)
        scores = dq_block_scores(encode_std(img, 75, "444"))
        assert scores.degenerate
        assert not scores.grid.any()

    def test_tiny_image_degenerate_not_error(self):
        img = synth_image(15, 15, seed=75, color=False)
        scores = dq_block_scores(encode_std(img, 75, "444"))
        assert scores.degenerate
        assert not scores.grid.any()
        pm = dq_localization_map(encode_std(img, 75, "444"))
        assert pm.values.shape == (15, 15)

    def test_deterministic(self):
        fx = make_double_half(seed=76, q1=55, q2=85)
        a = dq_localization_map(fx.data)
        b = dq_localization_map(fx.data)
        assert np.array_equal(a.values, b.values)

    def test_estimates_true_primary_step_in_easy_regime(self):
        fx = make_double_half(seed=77, q1=55, q2=95)
        scores = dq_block_scores(fx.data)
        truth = standard_table(55).values
        assert scores.used_frequencies
        hits = sum(1 for f, s1, _ in scores.used_frequencies if s1 == truth[f])
        assert hits >= len(scores.used_frequencies) * 0.7


def test_double_pairs_respects_gap():
    for q1, q2 in double_pairs(31, 50, min_gap=15):
        assert 30 <= q1 < q2 <= 100
        assert q2 - q1 >= 15
