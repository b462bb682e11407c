"""Tests for Gabor enhancement, skeletonization, and minutia extraction."""

import numpy as np
import pytest

from latentfp.core import BIFURCATION, ENDING, RandomSource
from latentfp.orientation import OrientationField, estimate_raw_orientation
from latentfp.skeleton import (
    GaborConfig,
    _gabor_kernel,
    crossing_number,
    enhance_gabor,
    extract_minutiae,
    foreground_mask,
    minutia_map,
    prune_spurs,
    skeletonize,
)


def _sinusoid(h, w, angle, freq=1.0 / 9.0):
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    phase = 2.0 * np.pi * freq * (xs * np.sin(angle) - ys * np.cos(angle))
    return 0.5 + 0.5 * np.cos(phase)


def _uniform_field(h, w, angle):
    return OrientationField(
        angle=np.full((h, w), float(angle)), mask=np.ones((h, w), dtype=bool)
    )


class TestGaborKernel:
    def test_zero_dc(self):
        k = _gabor_kernel(1.0 / 9.0, 0.3, 4.0, 4.0, 8)
        assert abs(k.sum()) < 1e-10

    def test_peak_response_at_matching_frequency(self):
        # Correlating the kernel with an aligned sinusoid responds much more
        # strongly than with the orthogonal one.
        angle = np.pi / 6
        k = _gabor_kernel(1.0 / 9.0, angle, 4.0, 4.0, 8)
        aligned = _sinusoid(17, 17, angle) - 0.5
        crossed = _sinusoid(17, 17, angle + np.pi / 2) - 0.5
        r_aligned = abs(np.sum(k * aligned))
        r_crossed = abs(np.sum(k * crossed))
        assert r_aligned > 5.0 * r_crossed


class TestEnhance:
    def test_clean_sinusoid_stays_periodic(self):
        angle = np.pi / 3
        img = 1.0 - _sinusoid(96, 96, angle)    # ridges dark
        field = _uniform_field(96, 96, angle)
        enh = enhance_gabor(img, field)
        assert enh.shape == img.shape
        assert enh.min() >= 0.0 and enh.max() <= 1.0
        # Interior correlation with the input pattern stays strong.
        a = img[24:72, 24:72] - img[24:72, 24:72].mean()
        b = enh[24:72, 24:72] - enh[24:72, 24:72].mean()
        corr = np.sum(a * b) / np.sqrt(np.sum(a * a) * np.sum(b * b))
        assert corr > 0.8

    def test_background_stays_white(self):
        img = np.ones((64, 64))
        img[:, :32] = 1.0 - _sinusoid(64, 32, 0.0)
        field = _uniform_field(64, 64, 0.0)
        mask = np.zeros((64, 64), dtype=bool)
        mask[:, :32] = True
        enh = enhance_gabor(img, field, mask=mask)
        assert np.allclose(enh[:, 40:], 1.0)


class TestForegroundMask:
    def test_detects_textured_half(self):
        img = np.ones((96, 96))
        img[:, :48] = 1.0 - _sinusoid(96, 48, np.pi / 4)
        mask = foreground_mask(img)
        assert mask[48, 16]
        assert not mask[48, 80]


class TestSkeletonize:
    def test_stripes_become_one_pixel_wide(self):
        img = 1.0 - _sinusoid(96, 96, np.pi / 2)    # vertical ridges, dark
        skel = skeletonize(enhance_gabor(img, _uniform_field(96, 96, np.pi / 2)))
        assert skel.dtype == np.uint8
        interior = skel[20:76, 20:76]
        assert interior.sum() > 0
        # 1-px-wide: no 2x2 block is fully on.
        blocks = (
            interior[:-1, :-1] & interior[1:, :-1]
            & interior[:-1, 1:] & interior[1:, 1:]
        )
        assert blocks.sum() == 0


class TestCrossingNumber:
    def test_handcrafted_shapes(self):
        s = np.zeros((16, 16), dtype=np.uint8)
        s[8, 2:10] = 1           # horizontal segment
        s[5:8, 6] = 1            # branch upward at (8,6) -> bifurcation
        cn = crossing_number(s)
        assert cn[8, 2] == 1     # ending
        assert cn[8, 4] == 2     # interior ridge pixel
        assert cn[8, 6] == 3     # bifurcation
        assert cn[5, 6] == 1     # branch tip

    def test_isolated_pixel(self):
        s = np.zeros((8, 8), dtype=np.uint8)
        s[4, 4] = 1
        assert crossing_number(s)[4, 4] == 0


class TestPruneSpurs:
    def test_short_spur_removed_long_branch_kept(self):
        s = np.zeros((32, 32), dtype=np.uint8)
        s[16, 2:30] = 1          # main ridge
        s[13:16, 10] = 1         # 3-px spur
        pruned = prune_spurs(s, min_length=8)
        assert pruned[14, 10] == 0
        assert pruned[16, 5] == 1 and pruned[16, 25] == 1

    def test_long_branch_survives(self):
        s = np.zeros((32, 32), dtype=np.uint8)
        s[16, 2:30] = 1
        s[4:16, 10] = 1          # 12-px branch
        pruned = prune_spurs(s, min_length=8)
        assert pruned[6, 10] == 1


class TestExtractMinutiae:
    def test_segment_endpoints(self):
        s = np.zeros((48, 48), dtype=np.uint8)
        s[24, 14:34] = 1
        mins = extract_minutiae(s, spur_length=0, border=2)
        kinds = sorted(m.kind for m in mins)
        assert kinds == [ENDING, ENDING]
        xs = sorted(m.x for m in mins)
        assert xs == [14, 33]
        # Ending direction points along the ridge into the segment.
        left = next(m for m in mins if m.x == 14)
        assert abs(np.cos(left.angle) - 1.0) < 0.2

    def test_bifurcation_detected(self):
        s = np.zeros((48, 48), dtype=np.uint8)
        s[24, 8:40] = 1
        s[10:24, 24] = 1
        mins = extract_minutiae(s, spur_length=0, border=4)
        bif = [m for m in mins if m.kind == BIFURCATION]
        assert len(bif) == 1
        assert (bif[0].x, bif[0].y) == (24, 24)

    def test_border_suppression(self):
        s = np.zeros((48, 48), dtype=np.uint8)
        s[24, 0:48] = 1          # endpoints on the image border
        mins = extract_minutiae(s, spur_length=0, border=10)
        assert all(10 <= m.x < 38 for m in mins)

    def test_minutia_map_round_trip(self):
        s = np.zeros((48, 48), dtype=np.uint8)
        s[24, 14:34] = 1
        mins = extract_minutiae(s, spur_length=0, border=2)
        m = minutia_map(mins)
        assert m.sum() == len(mins.items)
        for mi in mins:
            assert m[mi.y, mi.x] == 1


class TestPipelineOnProcedural:
    def test_procedural_print_yields_minutiae(self):
        from latentfp.synthesis import procedural_print

        rng = RandomSource(3)
        img = procedural_print((160, 160), rng)
        field, _ = estimate_raw_orientation(img)
        enh = enhance_gabor(img, field)
        mask = foreground_mask(img)
        skel = skeletonize(enh, mask=mask)
        mins = extract_minutiae(skel, fg_mask=mask)
        assert len(mins.items) > 0
        assert all(0 <= m.angle < 2 * np.pi for m in mins)
