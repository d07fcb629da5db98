"""
亲和引导的特征增强算子（前向）

mean_affinity -> select -> smafs（多尺度加权融合）/ uafs（单尺度 3x3 融合）。
越界邻居特征按零填充处理；选择场是硬门控，不参与反向传播。
"""
from dataclasses import dataclass
from typing import Optional, Tuple, Union
import logging

import numpy as np

from .base import InvalidValue, LayoutMismatch, ScaleMismatch
from .affinity import NeighborhoodSpec, neighbor_offsets, offset_slices
from .types import AffinityField, FeatureMap, ScaleWeightMap, validate_shapes

logger = logging.getLogger(__name__)

MU_SCOPES = ("joint", "per_scale")
SELECT_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class SelectionField:
    """选择场 D_A：布局与来源亲和场一致，取值 {0, 1}"""

    scales: Tuple[int, ...]
    data: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return (int(self.data.shape[1]), int(self.data.shape[2]))


def _slot_values(pred: Union[AffinityField, np.ndarray]) -> np.ndarray:
    if isinstance(pred, AffinityField):
        return pred.data
    values = np.asarray(pred, dtype=np.float64)
    if values.ndim < 1 or values.shape[0] == 0:
        raise InvalidValue("亲和向量不能为空")
    return values


def _sequential_mean(values: np.ndarray) -> np.ndarray:
    # 按槽位顺序逐个累加，结果与逐像素标量循环逐位一致
    total = np.array(values[0], dtype=np.float64, copy=True)
    for slot in range(1, values.shape[0]):
        total += values[slot]
    return total / values.shape[0]


def mean_affinity(pred: Union[AffinityField, np.ndarray]) -> np.ndarray:
    """
    平均亲和 μ(x) = (1/N) Σ_l y_x^l

    Args:
        pred: 亲和场，或首维为槽位的数组 (N, ...)

    Returns:
        去掉槽位维后的 μ 数组
    """
    return _sequential_mean(_slot_values(pred))


def _select_group(values: np.ndarray) -> np.ndarray:
    mu = _sequential_mean(values)
    # 与真实 μ 相等的槽位可能因舍入落在计算值之下，按相对容差判等
    tol = SELECT_TOLERANCE * np.maximum(1.0, np.abs(mu))
    return (values - mu >= -tol).astype(np.uint8)



def select_slots(values: np.ndarray, mu_scope: str = "joint") -> np.ndarray:
    """
    硬选择：y_x^l - μ(x) >= 0 时 d_x^l = 1

    Args:
        values: 首维为槽位的数组 (N, ...)
        mu_scope: "joint" 在全部 N 个槽位上求 μ；"per_scale" 每 8 个槽位一组求 μ

    Returns:
        与 values 同形状的 uint8 数组
    """
    values = _slot_values(values)
    if mu_scope == "joint":
        return _select_group(values)
    if mu_scope == "per_scale":
        if values.shape[0] % 8:
            raise LayoutMismatch(f"per_scale 模式要求槽位数为 8 的倍数: {values.shape[0]}")
        groups = [_select_group(values[start:start + 8]) for start in range(0, values.shape[0], 8)]
        return np.concatenate(groups, axis=0)
    raise InvalidValue(f"未知的 mu_scope: {mu_scope}（可选: {', '.join(MU_SCOPES)}）")


def select(pred: AffinityField, mu_scope: str = "joint") -> SelectionField:
    """由预测亲和场构造选择场 D_A"""
    data = select_slots(pred.data, mu_scope)
    data.setflags(write=False)
    return SelectionField(scales=tuple(pred.scales), data=data)


def smafs_aggregate(features: np.ndarray, selection: np.ndarray, weights: np.ndarray, scales) -> np.ndarray:
    """
    聚合项 Σ_M Σ_l W_M(x) · d_x^l · f_seg(x_l)（不含残差）

    Args:
        features: (C, H, W)
        selection: (8|S|, H, W)，取值 {0, 1}
        weights: (|S|, H, W)
        scales: 尺度列表

    Returns:
        (C, H, W) 聚合结果
    """
    _, height, width = features.shape
    aggregate = np.zeros_like(features, dtype=np.float64)
    offsets = neighbor_offsets(NeighborhoodSpec(tuple(scales)))
    for slot, offset in enumerate(offsets):
        gate = weights[slot // 8] * selection[slot]
        dst, src = offset_slices(offset, height, width)
        aggregate[(slice(None),) + dst] += gate[dst] * features[(slice(None),) + src]
    return aggregate


def smafs(
    features: FeatureMap,
    pred: AffinityField,
    weights: ScaleWeightMap,
    mu_scope: str = "joint",
) -> FeatureMap:
    """
    监督多尺度亲和特征增强

    f_s(x) = Σ_{M∈S} Σ_{l∈N_M(x)} W_M(x) · d_x^l · f_seg(x_l) + f_seg(x)，逐通道计算。

    Raises:
        ShapeMismatch: 特征、亲和场、权重尺寸不一致
        ScaleMismatch: 权重尺度与亲和场尺度不一致
    """
    validate_shapes(features, pred)
    validate_shapes(weights, pred)
    if tuple(weights.scales) != tuple(pred.scales):
        raise ScaleMismatch(f"权重尺度 {list(weights.scales)} 与亲和场尺度 {list(pred.scales)} 不一致")

    selection = select(pred, mu_scope)
    aggregate = smafs_aggregate(features.data, selection.data, weights.data, pred.scales)
    logger.debug(
        f"SMAFS: 通道={features.channels}, 尺度={list(pred.scales)}, 选中比例={selection.data.mean():.3f}"
    )
    return FeatureMap(aggregate + features.data)


def uafs(features: FeatureMap, pred: AffinityField, mu_scope: str = "joint") -> FeatureMap:
    """
    无监督单尺度（3x3）亲和特征增强，等价于单位权重的单尺度 SMAFS

    Raises:
        LayoutMismatch: 亲和场不是单一的 3x3 尺度
    """
    if tuple(pred.scales) != (3,):
        raise LayoutMismatch(f"UAFS 只接受单尺度 [3] 的亲和场，实际为 {list(pred.scales)}")
    weights = ScaleWeightMap.uniform((3,), pred.height, pred.width, 1.0)
    return smafs(features, pred, weights, mu_scope)


def afn_strengthen(
    features: FeatureMap,
    pred_multi: AffinityField,
    weights: ScaleWeightMap,
    pred_single: Optional[AffinityField] = None,
    mu_scope: str = "joint",
) -> FeatureMap:
    """完整增强顺序：先 UAFS（若提供单尺度亲和场），再 SMAFS"""
    if pred_single is not None:
        features = uafs(features, pred_single, mu_scope)
    return smafs(features, pred_multi, weights, mu_scope)
