from pathlib import Path
import sys

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent / "src"))

from config.settings import settings
from vessel_affinity.core.base import InvalidRatio
from vessel_affinity.core.perturb import (
    ContrastSweep,
    adjust_contrast,
    adjust_contrast_channels,
    ratio_tag,
    sweep,
)
from vessel_affinity.core.synthgen import TreeParams, generate_tree, render_intensity
from vessel_affinity.core.types import Grayscale, rng_new


def _images(count=20):
    for seed in range(count):
        tree = generate_tree(TreeParams(seed=seed))
        yield render_intensity(tree.mask, seed, noise_sigma=10.0)


def test_identity_ratio_is_bit_exact():
    for image in _images():
        assert np.array_equal(adjust_contrast(image, 1.0).data, image.data)


def test_mean_preserved():
    for image in _images():
        for ratio in (1.7, 1.6, 1.5, 0.9, 0.85, 0.8):
            adjusted = adjust_contrast(image, ratio)
            assert abs(adjusted.data.mean() - image.data.mean()) < 1e-9


def test_composition():
    for image in _images():
        composed = adjust_contrast(adjust_contrast(image, 1.5), 0.8)
        direct = adjust_contrast(image, 1.5 * 0.8)
        assert np.max(np.abs(composed.data - direct.data)) < 1e-9


def test_example_values():
    image = Grayscale(np.array([[100.0, 200.0]]))
    assert adjust_contrast(image, 2.0).data.tolist() == [[50.0, 250.0]]
    assert adjust_contrast(image, 0.5).data.tolist() == [[125.0, 175.0]]


def test_constant_image_unchanged():
    image = Grayscale(np.full((4, 4), 77.0))
    assert np.array_equal(adjust_contrast(image, 1.7).data, image.data)


def test_clamp():
    image = Grayscale(np.array([[0.0, 255.0]]))
    unclamped = adjust_contrast(image, 2.0)
    assert unclamped.data.min() < 0.0
    clamped = adjust_contrast(image, 2.0, clamp=True)
    assert clamped.data.tolist() == [[0.0, 255.0]]


@pytest.mark.parametrize("ratio", [0.0, -1.0, float("nan")])
def test_invalid_ratio(ratio):
    with pytest.raises(InvalidRatio):
        adjust_contrast(Grayscale(np.zeros((2, 2))), ratio)


def test_preset_ratio_lists_accepted():
    for name in ("xcad", "drive"):
        contrast_sweep = ContrastSweep(settings.DATASET_PRESETS[name]["ratios"])
        assert len(contrast_sweep) == 6
    with pytest.raises(InvalidRatio):
        ContrastSweep(())


def test_sweep_keeps_ratio_order():
    image = Grayscale(rng_new(40).uniform(0, 255, size=(6, 6)))
    ratios = (1.3, 1.2, 1.1, 0.4, 0.3, 0.2)
    results = sweep(image, ContrastSweep(ratios))
    assert [ratio for ratio, _ in results] == list(ratios)


def test_per_channel_uses_each_channel_mean():
    red = Grayscale(np.array([[0.0, 100.0]]))
    green = Grayscale(np.array([[200.0, 220.0]]))
    out = adjust_contrast_channels((red, green), 2.0)
    assert out[0].data.tolist() == [[-50.0, 150.0]]
    assert out[1].data.tolist() == [[190.0, 230.0]]
    with pytest.raises(InvalidRatio):
        adjust_contrast_channels((), 2.0)


def test_ratio_tag():
    assert ratio_tag(1.7) == "r1.7"
    assert ratio_tag(0.85) == "r0.85"
    assert ratio_tag(1.0) == "r1"
