"""Tests for sliding-window full-image enhancement."""

import numpy as np
import pytest
import torch

from latentfp.inference import (
    InferenceConfig,
    binarize,
    enhance_full_image,
    padded_extent,
    torch_predictor,
    window_origins,
)
from latentfp.network import Generator, GeneratorSpec


class TestTilingArithmetic:
    def test_padded_extent_cases(self):
        assert padded_extent(200, 192, 8) == 200
        assert padded_extent(201, 192, 8) == 208
        assert padded_extent(192, 192, 8) == 192
        assert padded_extent(100, 192, 8) == 192
        assert padded_extent(199, 192, 8) == 200

    def test_window_origins_cover_extent(self):
        assert window_origins(200, 192, 8) == [0, 8]
        assert window_origins(192, 192, 8) == [0]
        assert window_origins(100, 192, 8) == [0]
        for extent in (192, 200, 208, 256):
            origins = window_origins(extent, 192, 8)
            assert origins[-1] + 192 == extent
            assert origins == sorted(origins)

    def test_full_coverage_no_holes(self):
        for extent in (192, 200, 248):
            cov = np.zeros(extent)
            for o in window_origins(extent, 192, 8):
                cov[o:o + 192] += 1
            assert cov.min() >= 1

    def test_config_validation(self):
        with pytest.raises(ValueError):
            InferenceConfig(window=8, step=16)
        with pytest.raises(ValueError):
            InferenceConfig(aggregation="median")


class TestEnhanceFullImage:
    def _identity(self, patches):
        return patches

    def test_identity_predictor_reproduces_input(self):
        rng = np.random.default_rng(0)
        img = rng.random((200, 200))
        cfg = InferenceConfig(window=192, step=8)
        out = enhance_full_image(img, self._identity, cfg)
        assert out.shape == img.shape
        assert np.max(np.abs(out - img)) < 1e-12

    def test_identity_with_gaussian_aggregation(self):
        rng = np.random.default_rng(1)
        img = rng.random((200, 208))
        cfg = InferenceConfig(window=192, step=8, aggregation="gaussian")
        out = enhance_full_image(img, self._identity, cfg)
        assert np.max(np.abs(out - img)) < 1e-10

    def test_small_image_padded_and_cropped(self):
        rng = np.random.default_rng(2)
        img = rng.random((100, 120))
        out = enhance_full_image(img, self._identity, InferenceConfig())
        assert out.shape == (100, 120)
        assert np.max(np.abs(out - img)) < 1e-12

    def test_constant_predictor(self):
        img = np.random.default_rng(3).random((200, 200))
        out = enhance_full_image(img, lambda p: np.full_like(p, 0.25),
                                 InferenceConfig())
        assert np.allclose(out, 0.25)

    def test_predictions_clipped(self):
        img = np.random.default_rng(4).random((64, 64))
        cfg = InferenceConfig(window=32, step=8)
        out = enhance_full_image(img, lambda p: p * 3.0 - 1.0, cfg)
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_batching_invariant(self):
        img = np.random.default_rng(5).random((208, 208))
        a = enhance_full_image(img, self._identity,
                               InferenceConfig(window=192, step=8, batch_size=1))
        b = enhance_full_image(img, self._identity,
                               InferenceConfig(window=192, step=8, batch_size=8))
        assert np.array_equal(a, b)


class TestTorchPredictor:
    def test_wraps_generator(self):
        torch.manual_seed(0)
        gen = Generator(GeneratorSpec(patch_size=64, base_channels=8))
        predict = torch_predictor(gen)
        patches = np.random.default_rng(0).random((3, 64, 64))
        out = predict(patches)
        assert out.shape == (3, 64, 64)
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_end_to_end_window_count(self):
        # A spy predictor counts patches: 200x200 with window 192 step 8
        # must evaluate exactly 4 windows.
        calls = []

        def spy(patches):
            calls.append(len(patches))
            return patches

        img = np.random.default_rng(1).random((200, 200))
        enhance_full_image(img, spy, InferenceConfig(window=192, step=8,
                                                     batch_size=100))
        assert sum(calls) == 4


class TestBinarize:
    def test_threshold(self):
        arr = np.array([[0.2, 0.6], [0.5, 0.9]])
        out = binarize(arr)
        assert out.dtype == np.uint8
        assert np.array_equal(out, [[0, 1], [0, 1]])
