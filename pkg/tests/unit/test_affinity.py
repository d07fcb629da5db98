from pathlib import Path
import sys

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent / "src"))

from vessel_affinity.core.affinity import (
    NeighborhoodSpec,
    compute_affinity,
    mask_from_affinity_consistency,
    neighbor_offsets,
    offset_slices,
    require_same_layout,
)
from vessel_affinity.core.base import LayoutMismatch, ShapeMismatch
from vessel_affinity.core.oracles import brute_force_affinity
from vessel_affinity.core.types import OPPOSITE_DIRECTION, AffinityField, Mask, ProbMap, rng_new

ORACLE_SCALES = [(3,), (3, 5, 7), (3, 9, 15)]


def _random_labels(rng, max_side=32):
    height, width = (int(v) for v in rng.integers(1, max_side + 1, size=2))
    return (rng.random((height, width)) < 0.4).astype(np.uint8)


def test_spec_radii_and_slot_count():
    spec = NeighborhoodSpec((3, 9, 15))
    assert spec.radii == (1, 4, 7)
    assert spec.slot_count == 24


def test_neighbor_offsets_canonical_order():
    offsets = neighbor_offsets(NeighborhoodSpec((3, 5)))
    assert offsets[:8] == [(0, -1), (0, 1), (-1, 0), (1, 0), (-1, -1), (1, -1), (-1, 1), (1, 1)]
    assert offsets[8] == (0, -2)
    assert offsets[15] == (2, 2)


def test_offset_slices_without_overlap():
    dst, src = offset_slices((0, -5), 3, 3)
    assert dst == (slice(0, 0), slice(0, 0))
    assert src == (slice(0, 0), slice(0, 0))


def test_single_pixel_vessel_in_empty_image():
    labels = np.zeros((5, 5), dtype=np.uint8)
    labels[2, 2] = 1
    field = compute_affinity(Mask(labels), NeighborhoodSpec((3,)))
    assert field.vector(2, 2).tolist() == [0.0] * 8
    # 背景像素看向中心像素的槽位为 0，其余为 1
    assert field.data[0, 2, 3] == 0.0
    assert field.data[1, 2, 3] == 1.0


def test_uniform_mask_interior_all_ones_border_zero():
    field = compute_affinity(Mask(np.ones((5, 5), dtype=np.uint8)), NeighborhoodSpec((3,)))
    assert np.all(field.vector(2, 2) == 1.0)
    # 左上角的 L / T / LT / LB / RT 越界
    assert field.vector(0, 0).tolist() == [0, 1, 0, 1, 0, 0, 0, 1]


def test_scale_larger_than_image_gives_zero_slots():
    field = compute_affinity(Mask(np.ones((3, 3), dtype=np.uint8)), NeighborhoodSpec((3, 15)))
    assert np.all(field.data[8:] == 0.0)
    assert field.slots == 16


def test_prob_map_is_binarized_first():
    prob = ProbMap(np.array([[0.2, 0.7], [0.6, 0.1]]))
    from_prob = compute_affinity(prob, NeighborhoodSpec((3,)))
    from_mask = compute_affinity(prob.binarize(0.5), NeighborhoodSpec((3,)))
    assert np.array_equal(from_prob.data, from_mask.data)


def test_matches_brute_force_oracle():
    rng = rng_new(0)
    for _ in range(100):
        labels = _random_labels(rng)
        for scales in ORACLE_SCALES:
            field = compute_affinity(Mask(labels), NeighborhoodSpec(scales))
            assert np.array_equal(field.data, brute_force_affinity(labels, scales))


def test_reciprocity_and_inversion():
    rng = rng_new(1)
    for _ in range(50):
        mask = Mask(_random_labels(rng))
        for scales in ORACLE_SCALES:
            spec = NeighborhoodSpec(scales)
            field = compute_affinity(mask, spec).data
            assert np.array_equal(field, compute_affinity(mask.invert(), spec).data)
            for slot, offset in enumerate(neighbor_offsets(spec)):
                opposite = (slot // 8) * 8 + OPPOSITE_DIRECTION[slot % 8]
                dst, src = offset_slices(offset, mask.height, mask.width)
                assert np.array_equal(field[slot][dst], field[opposite][src])


def test_consistency_check():
    rng = rng_new(2)
    mask = Mask(_random_labels(rng, 12))
    spec = NeighborhoodSpec((3, 5))
    field = compute_affinity(mask, spec)
    assert mask_from_affinity_consistency(field, mask, spec)
    assert not mask_from_affinity_consistency(field, mask, NeighborhoodSpec((3, 7)))


def test_require_same_layout():
    a = AffinityField((3,), np.zeros((8, 4, 4)))
    with pytest.raises(ShapeMismatch):
        require_same_layout(a, AffinityField((3,), np.zeros((8, 4, 5))))
    with pytest.raises(LayoutMismatch):
        require_same_layout(a, AffinityField((5,), np.zeros((8, 4, 4))))
