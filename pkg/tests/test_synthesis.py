"""Tests for latent synthesis: speckle, fusion, procedural data, datasets."""

import csv
import os

import numpy as np
import pytest

from latentfp.core import RandomSource, load_gray_image, load_grid
from latentfp.synthesis import (
    FusionParams,
    SpeckleParams,
    SynthesisConfig,
    add_speckle,
    build_training_pair,
    crop_background,
    fuse_background,
    procedural_background,
    procedural_print,
    quality_coherence,
    synthesize_latent,
    write_dataset,
)


class TestSpeckle:
    def test_statistics_match_model(self):
        # n = I * a * U(-1,1): zero mean, variance I^2 * a^2 / 3.
        var = 0.01
        img = np.full((1000, 1000), 0.5)
        out = add_speckle(img, SpeckleParams(variance=var), RandomSource(1))
        noise = out - img
        assert abs(noise.mean()) < 1e-3
        assert noise.var() == pytest.approx(0.25 * var, rel=0.01)

    def test_black_pixels_unchanged(self):
        img = np.zeros((64, 64))
        out = add_speckle(img, SpeckleParams(variance=0.019), RandomSource(2))
        assert np.array_equal(out, img)

    def test_clamped_to_unit_range(self):
        img = np.ones((64, 64))
        out = add_speckle(img, SpeckleParams(variance=0.019), RandomSource(3))
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_variance_validation(self):
        with pytest.raises(ValueError):
            SpeckleParams(variance=0.0)
        with pytest.raises(ValueError):
            SpeckleParams(variance=0.02)

    def test_deterministic(self):
        img = np.full((32, 32), 0.5)
        a = add_speckle(img, SpeckleParams(variance=0.01), RandomSource(9))
        b = add_speckle(img, SpeckleParams(variance=0.01), RandomSource(9))
        assert np.array_equal(a, b)


class TestFusion:
    def test_affine_blend(self):
        b2 = np.full((8, 8), 0.4)
        bg = np.full((8, 8), 0.8)
        out = fuse_background(b2, FusionParams(lam=0.3, background=bg))
        assert np.allclose(out, 0.7 * 0.4 + 0.3 * 0.8)

    def test_weight_validation(self):
        bg = np.zeros((4, 4))
        with pytest.raises(ValueError):
            FusionParams(lam=0.1, background=bg)
        with pytest.raises(ValueError):
            FusionParams(lam=0.9, background=bg)

    def test_crop_background_shape(self):
        bg = np.linspace(0, 1, 300 * 280).reshape(300, 280)
        crop = crop_background(bg, (128, 96), RandomSource(4))
        assert crop.shape == (128, 96)

    def test_crop_small_background_tiles(self):
        bg = np.random.default_rng(0).random((40, 40))
        crop = crop_background(bg, (100, 100), RandomSource(5))
        assert crop.shape == (100, 100)
        assert crop.min() >= 0.0 and crop.max() <= 1.0


class TestProcedural:
    def test_print_has_ridge_structure(self):
        img = procedural_print((160, 160), RandomSource(11))
        assert img.shape == (160, 160)
        assert img.min() >= 0.0 and img.max() <= 1.0
        assert quality_coherence(img) > 0.3

    def test_background_in_range(self):
        bg = procedural_background((150, 200), RandomSource(12))
        assert bg.shape == (150, 200)
        assert bg.min() >= 0.0 and bg.max() <= 1.0

    def test_prints_differ_by_seed(self):
        a = procedural_print((96, 96), RandomSource(1))
        b = procedural_print((96, 96), RandomSource(2))
        assert not np.array_equal(a, b)

    def test_deterministic(self):
        a = procedural_print((96, 96), RandomSource(7))
        b = procedural_print((96, 96), RandomSource(7))
        assert np.array_equal(a, b)


class TestSynthesizeLatent:
    def test_output_shape_and_range(self):
        rolled = procedural_print((128, 128), RandomSource(20))
        bgs = [procedural_background((160, 160), RandomSource(21))]
        latent = synthesize_latent(rolled, SynthesisConfig(), bgs, RandomSource(22))
        assert latent.shape == rolled.shape
        assert latent.min() >= 0.0 and latent.max() <= 1.0

    def test_latent_differs_from_rolled(self):
        rolled = procedural_print((128, 128), RandomSource(20))
        bgs = [procedural_background((160, 160), RandomSource(21))]
        latent = synthesize_latent(rolled, SynthesisConfig(), bgs, RandomSource(22))
        assert np.mean(np.abs(latent - rolled)) > 0.01


class TestTrainingPairAndDataset:
    @pytest.fixture(scope="class")
    def small_cfg(self):
        return SynthesisConfig(latents_per_print=2)

    def test_build_training_pair_contract(self, small_cfg):
        rolled = procedural_print((160, 160), RandomSource(30))
        bgs = [procedural_background((200, 200), RandomSource(31))]
        pair = build_training_pair(rolled, bgs, RandomSource(32), small_cfg)
        assert len(pair.latent_textures) == 2
        assert pair.skeleton_gt.shape == rolled.shape
        assert set(np.unique(pair.skeleton_gt)).issubset({0, 1})
        assert pair.orientation_gt.shape == rolled.shape
        assert np.all(pair.orientation_gt >= 0) and np.all(pair.orientation_gt < np.pi)
        assert np.all(pair.weight_map > 0)
        for lat in pair.latent_textures:
            assert lat.shape == rolled.shape

    def test_write_dataset_layout(self, small_cfg, tmp_path):
        prints = [procedural_print((160, 160), RandomSource(40 + i)) for i in range(2)]
        bgs = [procedural_background((200, 200), RandomSource(50))]
        manifest = write_dataset(str(tmp_path), prints, bgs, seed=7, cfg=small_cfg,
                                 min_quality=0.0)
        with open(manifest, encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh, delimiter="\t"))
        assert len(rows) == 2 * small_cfg.latents_per_print
        for row in rows:
            for col in ("latent", "skeleton", "orient", "weight", "gray"):
                assert os.path.exists(os.path.join(tmp_path, row[col]))
        # Grids and images load back at matching shapes.
        first = rows[0]
        lat = load_gray_image(os.path.join(tmp_path, first["latent"]))
        w = load_grid(os.path.join(tmp_path, first["weight"]))
        o = load_grid(os.path.join(tmp_path, first["orient"]))
        assert lat.shape == w.shape == o.shape

    def test_quality_filter_drops_flat_prints(self, small_cfg, tmp_path):
        flat = np.full((160, 160), 0.5)
        bgs = [procedural_background((200, 200), RandomSource(50))]
        manifest = write_dataset(str(tmp_path), [flat], bgs, seed=7, cfg=small_cfg,
                                 min_quality=0.5)
        with open(manifest, encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh, delimiter="\t"))
        assert rows == []
