from pathlib import Path
import sys

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent / "src"))

from vessel_affinity.core.base import InvalidValue, LayoutMismatch, ScaleMismatch, ShapeMismatch
from vessel_affinity.core.oracles import brute_force_select, brute_force_smafs
from vessel_affinity.core.strengthening import (
    afn_strengthen,
    mean_affinity,
    select,
    select_slots,
    smafs,
    smafs_aggregate,
    uafs,
)
from vessel_affinity.core.types import AffinityField, FeatureMap, ScaleWeightMap, rng_new


def _column(values):
    return np.asarray(values, dtype=np.float64).reshape(-1, 1)


def test_mean_affinity_examples():
    assert mean_affinity(_column([1] * 8))[0] == 1.0
    assert mean_affinity(_column([1, 0, 1, 0, 1, 0, 1, 0]))[0] == 0.5
    assert mean_affinity(_column([1] * 6 + [0] * 18))[0] == 0.25


def test_mean_affinity_rejects_empty():
    with pytest.raises(InvalidValue):
        mean_affinity(np.zeros((0, 1)))


def test_select_examples():
    assert select_slots(_column([1, 0, 1, 0, 1, 0, 1, 0]))[:, 0].tolist() == [1, 0, 1, 0, 1, 0, 1, 0]
    assert select_slots(_column([0.9] + [0.1] * 7))[:, 0].tolist() == [1, 0, 0, 0, 0, 0, 0, 0]


def test_select_keeps_slots_equal_to_rounded_mean():
    # 顺序累加得到 μ = 0.20000000000000004，比等于真实均值的 0.2 槽位略大
    vector = [0.1, 0.2, 0.3, 0.1, 0.2, 0.3, 0.1, 0.3]
    expected = [0, 1, 1, 0, 1, 1, 0, 1]
    assert mean_affinity(_column(vector))[0] > 0.2
    assert select_slots(_column(vector))[:, 0].tolist() == expected
    assert list(brute_force_select(vector)) == expected


@pytest.mark.parametrize("value", [0.1, 0.3, 0.7, 1.0 / 3.0, 0.123456789])
def test_uniform_vector_selects_every_slot(value):
    for slots in (8, 16, 24):
        assert select_slots(np.full((slots, 1), value)).sum() == slots


def test_select_matches_scalar_oracle():
    rng = rng_new(20)
    for _ in range(200):
        vector = rng.random(24)
        if rng.random() < 0.3:
            vector = np.round(vector, 1)
        assert tuple(select_slots(_column(vector))[:, 0]) == brute_force_select(vector)


def test_select_affine_invariance():
    rng = rng_new(21)
    for _ in range(100):
        vector = rng.random((24, 1))
        base = select_slots(vector)
        for _ in range(20):
            a = rng.uniform(0.1, 10.0)
            b = rng.uniform(-5.0, 5.0)
            assert np.array_equal(select_slots(a * vector + b), base)


def test_per_scale_mu_scope():
    vector = _column([1.0] * 8 + [0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1])
    joint = select_slots(vector, "joint")[:, 0]
    per_scale = select_slots(vector, "per_scale")[:, 0]
    assert joint.tolist() == [1] * 8 + [0] * 8
    assert per_scale.tolist() == [1] * 8 + [1] + [0] * 7


def test_per_scale_requires_groups_of_eight():
    with pytest.raises(LayoutMismatch):
        select_slots(np.ones((12, 1)), "per_scale")
    with pytest.raises(InvalidValue):
        select_slots(np.ones((8, 1)), "nearest")


def test_selection_field_is_binary_and_keeps_layout():
    pred = AffinityField((3, 5), rng_new(22).random((16, 4, 4)))
    selection = select(pred)
    assert selection.scales == (3, 5)
    assert set(np.unique(selection.data)) <= {0, 1}
    assert selection.shape == (4, 4)


def test_smafs_interior_example():
    features = FeatureMap(np.full((1, 5, 5), 2.0))
    pred = AffinityField((3,), np.ones((8, 5, 5)))
    weights = ScaleWeightMap.uniform((3,), 5, 5, 0.5)
    out = smafs(features, pred, weights)
    assert out.data[0, 2, 2] == 10.0
    # 角点只有 3 个邻居在图像内
    assert out.data[0, 0, 0] == 0.5 * 3 * 2.0 + 2.0


def test_smafs_zero_weights_is_identity():
    rng = rng_new(23)
    features = FeatureMap(rng.normal(size=(3, 6, 6)))
    pred = AffinityField((3, 5), rng.random((16, 6, 6)))
    out = smafs(features, pred, ScaleWeightMap.uniform((3, 5), 6, 6, 0.0))
    assert np.array_equal(out.data, features.data)


def test_smafs_zero_selection_is_identity():
    rng = rng_new(24)
    features = rng.normal(size=(2, 5, 5))
    aggregate = smafs_aggregate(features, np.zeros((8, 5, 5), dtype=np.uint8), np.ones((1, 5, 5)), (3,))
    assert np.array_equal(aggregate + features, features)


def test_smafs_matches_brute_force_oracle():
    rng = rng_new(25)
    for _ in range(200):
        height, width = (int(v) for v in rng.integers(1, 7, size=2))
        channels = int(rng.integers(1, 4))
        scales = [(3,), (3, 5)][int(rng.integers(0, 2))]
        features = rng.normal(size=(channels, height, width))
        pred = rng.random((8 * len(scales), height, width))
        weights = rng.random((len(scales), height, width))
        out = smafs(FeatureMap(features), AffinityField(scales, pred), ScaleWeightMap(scales, weights))
        assert np.array_equal(out.data, brute_force_smafs(features, pred, weights, scales))


def test_smafs_linearity_in_features():
    rng = rng_new(26)
    f = rng.normal(size=(2, 8, 8))
    g = rng.normal(size=(2, 8, 8))
    selection = select_slots(rng.random((16, 8, 8)))
    weights = rng.random((2, 8, 8))
    alpha, beta = 1.5, -0.25
    combined = smafs_aggregate(alpha * f + beta * g, selection, weights, (3, 5))
    separate = alpha * smafs_aggregate(f, selection, weights, (3, 5)) + beta * smafs_aggregate(g, selection, weights, (3, 5))
    assert np.allclose(combined, separate, atol=1e-12)


def test_smafs_checks_shapes_and_scales():
    features = FeatureMap(np.zeros((1, 4, 4)))
    pred = AffinityField((3,), np.ones((8, 4, 4)))
    with pytest.raises(ScaleMismatch):
        smafs(features, pred, ScaleWeightMap.uniform((5,), 4, 4))
    with pytest.raises(ShapeMismatch):
        smafs(features, pred, ScaleWeightMap.uniform((3,), 4, 5))
    with pytest.raises(ShapeMismatch):
        smafs(FeatureMap(np.zeros((1, 3, 4))), pred, ScaleWeightMap.uniform((3,), 4, 4))


def test_uafs_constant_feature_interior():
    features = FeatureMap(np.full((1, 5, 5), 1.5))
    pred = AffinityField((3,), np.full((8, 5, 5), 0.7))
    assert uafs(features, pred).data[0, 2, 2] == pytest.approx(9 * 1.5)


def test_uafs_equals_unit_weight_smafs():
    rng = rng_new(27)
    for _ in range(20):
        features = FeatureMap(rng.normal(size=(2, 6, 7)))
        pred = AffinityField((3,), rng.random((8, 6, 7)))
        expected = smafs(features, pred, ScaleWeightMap.uniform((3,), 6, 7, 1.0))
        assert np.array_equal(uafs(features, pred).data, expected.data)


def test_uafs_rejects_multi_scale():
    pred = AffinityField((3, 5), np.ones((16, 4, 4)))
    with pytest.raises(LayoutMismatch):
        uafs(FeatureMap(np.zeros((1, 4, 4))), pred)


def test_afn_strengthen_applies_uafs_then_smafs():
    rng = rng_new(28)
    features = FeatureMap(rng.normal(size=(2, 6, 6)))
    single = AffinityField((3,), rng.random((8, 6, 6)))
    multi = AffinityField((3, 5), rng.random((16, 6, 6)))
    weights = ScaleWeightMap((3, 5), rng.random((2, 6, 6)))
    expected = smafs(uafs(features, single), multi, weights)
    assert np.array_equal(afn_strengthen(features, multi, weights, single).data, expected.data)
    assert np.array_equal(afn_strengthen(features, multi, weights).data, smafs(features, multi, weights).data)
