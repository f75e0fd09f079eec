import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maskscore.masks import (
    BBox,
    BinaryMask,
    RleMask,
    SoftMask,
    binarize,
    box_iou,
    crop_binary_nearest,
    crop_mask_nearest,
    mask_iou,
    mask_to_bbox,
    rle_decode,
    rle_encode,
)


def bm(rows):
    return BinaryMask(np.array(rows, dtype=bool))


class TestBinarize:
    def test_threshold_is_inclusive(self):
        m = SoftMask(np.array([[0.4, 0.5, 0.6]]))
        assert binarize(m, 0.5).bits.tolist() == [[False, True, True]]

    def test_all_zero_mask(self):
        m = SoftMask(np.zeros((3, 4)))
        assert binarize(m).area() == 0

    def test_idempotent_on_binary_values(self):
        rng = np.random.default_rng(7)
        m = SoftMask(rng.uniform(size=(9, 5)))
        for t in (0.2, 0.5, 1.0):
            once = binarize(m, t)
            lifted = SoftMask(once.bits.astype(np.float64))
            assert np.array_equal(binarize(lifted, t).bits, once.bits)

    def test_monotone_in_threshold(self):
        rng = np.random.default_rng(3)
        m = SoftMask(rng.uniform(size=(16, 16)))
        prev = binarize(m, 0.0)
        assert prev.area() == m.values.size  # threshold 0 means all foreground
        for t in (0.25, 0.5, 0.75, 1.0):
            cur = binarize(m, t)
            assert not np.any(cur.bits & ~prev.bits)  # raising t never adds pixels
            prev = cur

    def test_rejects_bad_threshold(self):
        m = SoftMask(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            binarize(m, 1.5)

    def test_rejects_out_of_range_values(self):
        with pytest.raises(ValueError):
            SoftMask(np.array([[0.0, 1.2]]))


class TestMaskIou:
    def test_identical_nonempty(self):
        a = bm([[1, 0], [1, 1]])
        assert mask_iou(a, a) == 1.0

    def test_disjoint(self):
        a = bm([[1, 0], [0, 0]])
        b = bm([[0, 0], [0, 1]])
        assert mask_iou(a, b) == 0.0

    def test_partial_overlap_pixel_count_oracle(self):
        # a = {(0,0),(0,1)} (row, col), b = {(0,1),(1,1)}: |inter|=1, |union|=3
        a = bm([[1, 1], [0, 0]])
        b = bm([[0, 1], [0, 1]])
        assert mask_iou(a, b) == pytest.approx(1 / 3, abs=1e-15)

    def test_empty_vs_empty_is_zero(self):
        e = bm([[0, 0], [0, 0]])
        assert mask_iou(e, e) == 0.0

    def test_dimension_mismatch_raises(self):
        with pytest.raises(ValueError):
            mask_iou(bm([[1]]), bm([[1, 0]]))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_axioms_on_random_masks(self, seed):
        rng = np.random.default_rng(seed)
        a = BinaryMask(rng.random((6, 9)) < 0.4)
        b = BinaryMask(rng.random((6, 9)) < 0.4)
        iou = mask_iou(a, b)
        assert 0.0 <= iou <= 1.0
        assert iou == mask_iou(b, a)
        if a.area() > 0:
            assert mask_iou(a, a) == 1.0
        if iou == 1.0:
            assert np.array_equal(a.bits, b.bits)


class TestBoxIou:
    def test_identical(self):
        b = BBox(1.0, 2.0, 3.0, 4.0)
        assert box_iou(b, b) == 1.0

    def test_disjoint(self):
        assert box_iou(BBox(0, 0, 1, 1), BBox(5, 5, 1, 1)) == 0.0

    def test_half_shifted_unit_squares(self):
        # overlap area 0.5, union 1.5
        assert box_iou(BBox(0, 0, 1, 1), BBox(0.5, 0, 1, 1)) == pytest.approx(1 / 3, abs=1e-15)

    def test_agrees_with_rasterized_mask_iou(self):
        # integer-aligned boxes: box_iou must equal mask_iou of their rasterizations
        rng = np.random.default_rng(11)
        for _ in range(200):
            x0, y0 = rng.integers(0, 10, size=2)
            w0, h0 = rng.integers(1, 8, size=2)
            x1, y1 = rng.integers(0, 10, size=2)
            w1, h1 = rng.integers(1, 8, size=2)
            grid_a = np.zeros((20, 20), dtype=bool)
            grid_b = np.zeros((20, 20), dtype=bool)
            grid_a[y0 : y0 + h0, x0 : x0 + w0] = True
            grid_b[y1 : y1 + h1, x1 : x1 + w1] = True
            expect = mask_iou(BinaryMask(grid_a), BinaryMask(grid_b))
            got = box_iou(BBox(x0, y0, w0, h0), BBox(x1, y1, w1, h1))
            assert got == pytest.approx(expect, abs=1e-12)


class TestRle:
    def test_all_background(self):
        r = rle_encode(bm([[0, 0], [0, 0]]))
        assert r.counts == (4,)

    def test_all_foreground(self):
        r = rle_encode(bm([[1, 1], [1, 1]]))
        assert r.counts == (0, 4)

    def test_column_major_order(self):
        # foreground only at (row 1, col 0): column-major offset is 1
        r = rle_encode(bm([[0, 0], [1, 0]]))
        assert r.counts == (1, 1, 2)

    def test_round_trip_1000_seeded_masks(self):
        rng = np.random.default_rng(1234)
        for _ in range(1000):
            m = BinaryMask(rng.random((7, 13)) < rng.uniform(0, 1))
            back = rle_decode(rle_encode(m))
            assert np.array_equal(back.bits, m.bits)

    @given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**32 - 1))
    @settings(max_examples=80, deadline=None)
    def test_round_trip_property(self, h, w, seed):
        rng = np.random.default_rng(seed)
        m = BinaryMask(rng.random((h, w)) < 0.5)
        assert np.array_equal(rle_decode(rle_encode(m)).bits, m.bits)

    def test_decode_rejects_bad_sum(self):
        with pytest.raises(ValueError):
            RleMask(width=2, height=2, counts=(3,))

    def test_json_shape_is_coco_uncompressed(self):
        r = rle_encode(bm([[0, 1], [0, 1]]))
        assert r.to_json() == {"size": [2, 2], "counts": [2, 2]}
        assert RleMask.from_json(r.to_json()) == r

    def test_from_json_rejects_compressed_strings(self):
        with pytest.raises(ValueError, match="compressed"):
            RleMask.from_json({"size": [2, 2], "counts": "abc"})


class TestMaskToBbox:
    def test_single_pixel(self):
        grid = np.zeros((8, 8), dtype=bool)
        grid[5, 3] = True  # (x=3, y=5)
        assert mask_to_bbox(BinaryMask(grid)) == BBox(3, 5, 1, 1)

    def test_empty(self):
        assert mask_to_bbox(bm([[0, 0]])) is None

    def test_full(self):
        assert mask_to_bbox(BinaryMask(np.ones((4, 6), dtype=bool))) == BBox(0, 0, 6, 4)


class TestCrops:
    def test_whole_frame_crop_is_identity_like(self):
        rng = np.random.default_rng(5)
        vals = rng.uniform(size=(28, 28))
        m = SoftMask(vals)
        out = crop_mask_nearest(m, BBox(0, 0, 28, 28), 28)
        assert np.array_equal(out.values, vals)

    def test_binary_crop_matches_soft_crop(self):
        rng = np.random.default_rng(6)
        grid = rng.random((32, 32)) < 0.5
        box = BBox(3.2, 4.7, 11.0, 9.5)
        b = crop_binary_nearest(BinaryMask(grid), box, 28)
        s = crop_mask_nearest(SoftMask(grid.astype(np.float64)), box, 28)
        assert np.array_equal(b.bits, s.values >= 0.5)
