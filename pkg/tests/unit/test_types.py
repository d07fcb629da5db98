from pathlib import Path
import sys

import numpy as np
import pytest
from scipy import stats

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent / "src"))

from vessel_affinity.core.base import InvalidScale, InvalidValue, ShapeMismatch
from vessel_affinity.core.types import (
    OPPOSITE_DIRECTION,
    AffinityField,
    FeatureMap,
    Grayscale,
    Mask,
    ProbMap,
    ScaleWeightMap,
    rng_new,
    validate_shapes,
)


def test_mask_accepts_bool_and_binary():
    mask = Mask(np.array([[True, False], [False, True]]))
    assert mask.data.dtype == np.uint8
    assert mask.count() == 2
    assert Mask(np.array([[0, 1]])).count() == 1


def test_mask_rejects_non_binary():
    with pytest.raises(InvalidValue):
        Mask(np.array([[0, 2]]))
    with pytest.raises(InvalidValue):
        Mask(np.array([[0.0, np.nan]]))


def test_mask_is_read_only():
    mask = Mask(np.zeros((3, 3), dtype=np.uint8))
    with pytest.raises(ValueError):
        mask.data[0, 0] = 1


def test_mask_invert():
    mask = Mask(np.array([[1, 0], [0, 0]]))
    assert mask.invert().count() == 3


def test_grayscale_rejects_non_finite():
    with pytest.raises(InvalidValue):
        Grayscale(np.array([[1.0, np.inf]]))


def test_grayscale_display_range():
    assert Grayscale(np.array([[0.0, 255.0]])).in_display_range()
    assert not Grayscale(np.array([[-1.0, 10.0]])).in_display_range()


def test_prob_map_range_and_binarize():
    prob = ProbMap(np.array([[0.2, 0.5, 0.9]]))
    assert prob.binarize(0.5).data.tolist() == [[0, 1, 1]]
    with pytest.raises(InvalidValue):
        ProbMap(np.array([[1.5]]))


def test_affinity_field_layout():
    field = AffinityField((3, 9, 15), np.ones((24, 4, 5)))
    assert field.slots == 24
    assert field.shape == (4, 5)
    assert field.layout[0] == (3, 0)
    assert field.layout[8] == (9, 0)
    assert field.layout[-1] == (15, 7)
    assert field.is_binary()


def test_affinity_field_slot_count_must_match_scales():
    with pytest.raises(InvalidValue):
        AffinityField((3, 9), np.ones((8, 4, 4)))


def test_affinity_field_rejects_out_of_range():
    with pytest.raises(InvalidValue):
        AffinityField((3,), np.full((8, 2, 2), 1.5))


@pytest.mark.parametrize("scales", [(2,), (3, 3), (9, 3), (1,), ()])
def test_affinity_field_rejects_bad_scales(scales):
    with pytest.raises(InvalidScale):
        AffinityField(scales, np.ones((8 * max(1, len(scales)), 2, 2)))


def test_opposite_direction_is_involution():
    for index, opposite in enumerate(OPPOSITE_DIRECTION):
        assert OPPOSITE_DIRECTION[opposite] == index


def test_feature_and_weight_maps():
    features = FeatureMap(np.zeros((3, 4, 4)))
    assert features.channels == 3
    weights = ScaleWeightMap.uniform((3, 5), 4, 4, 0.5)
    assert weights.data.shape == (2, 4, 4)
    with pytest.raises(InvalidValue):
        ScaleWeightMap((3, 5), np.zeros((1, 4, 4)))


def test_validate_shapes_names_both_sides():
    with pytest.raises(ShapeMismatch) as excinfo:
        validate_shapes(Mask.empty(3, 4), Mask.empty(4, 3))
    assert "(3, 4)" in str(excinfo.value)
    assert "(4, 3)" in str(excinfo.value)


def test_rng_new_is_reproducible():
    a = rng_new(42).random(5)
    b = rng_new(42).random(5)
    c = rng_new(43).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_rng_new_draws_are_uniform():
    draws = rng_new(7).random(100_000)
    assert draws.min() >= 0.0
    assert draws.max() < 1.0
    assert stats.kstest(draws, "uniform").pvalue > 1e-4
