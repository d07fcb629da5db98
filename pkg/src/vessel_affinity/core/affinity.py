"""多尺度亲和场真值计算"""
from dataclasses import dataclass
from typing import List, Tuple, Union
import logging

import numpy as np

from .base import ShapeMismatch, LayoutMismatch
from .types import DIRECTION_UNITS, AffinityField, Mask, ProbMap, validate_shapes
from ..validators.input_validator import validate_scales

logger = logging.getLogger(__name__)

Offset = Tuple[int, int]


@dataclass(frozen=True)
class NeighborhoodSpec:
    """
    多尺度邻域定义

    每个尺度 k 取 k x k 窗口中半径 r = (k - 1) / 2 的 8 个方位点，
    总槽位数 N = 8 x len(scales)（例如 [3, 9, 15] -> N = 24）。
    """

    scales: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "scales", validate_scales(self.scales))

    @property
    def radii(self) -> Tuple[int, ...]:
        return tuple((k - 1) // 2 for k in self.scales)

    @property
    def slot_count(self) -> int:
        return 8 * len(self.scales)


def neighbor_offsets(spec: NeighborhoodSpec) -> List[Offset]:
    """
    按规范槽位顺序返回每个槽位的 (Δrow, Δcol)

    Args:
        spec: 邻域定义

    Returns:
        偏移列表，长度为 8 x len(scales)
    """
    offsets: List[Offset] = []
    for radius in spec.radii:
        for unit_row, unit_col in DIRECTION_UNITS:
            offsets.append((unit_row * radius, unit_col * radius))
    return offsets


def offset_slices(offset: Offset, height: int, width: int) -> Tuple[Tuple[slice, slice], Tuple[slice, slice]]:
    """
    计算偏移后仍在图像内的区域

    Returns:
        (目标像素 x 的切片, 邻居像素 x + offset 的切片)；无重叠时切片为空
    """
    dr, dc = offset
    r0, r1 = max(0, -dr), min(height, height - dr)
    c0, c1 = max(0, -dc), min(width, width - dc)
    if r1 <= r0 or c1 <= c0:
        empty = (slice(0, 0), slice(0, 0))
        return empty, empty
    return (slice(r0, r1), slice(c0, c1)), (slice(r0 + dr, r1 + dr), slice(c0 + dc, c1 + dc))


def compute_affinity(mask: Union[Mask, ProbMap], spec: NeighborhoodSpec) -> AffinityField:
    """
    由标签图计算亲和场真值：邻居与中心同类为 1，否则为 0

    越界邻居记为 0（视为不同类别）；软标签先按 0.5 二值化。

    Args:
        mask: 二值标签图（或概率图）
        spec: 邻域定义

    Returns:
        与 spec 布局一致的 AffinityField
    """
    if isinstance(mask, ProbMap):
        mask = mask.binarize(0.5)
    labels = mask.data
    height, width = labels.shape
    field = np.zeros((spec.slot_count, height, width), dtype=np.float64)

    for slot, offset in enumerate(neighbor_offsets(spec)):
        dst, src = offset_slices(offset, height, width)
        field[slot][dst] = labels[dst] == labels[src]

    logger.debug(f"亲和场计算完成: {height}x{width}, 尺度={list(spec.scales)}, 槽位={spec.slot_count}")
    return AffinityField(spec.scales, field)


def mask_from_affinity_consistency(field: AffinityField, mask: Mask, spec: NeighborhoodSpec) -> bool:
    """
    检查亲和场是否与 compute_affinity(mask, spec) 完全一致

    Raises:
        ShapeMismatch: 亲和场与标签图尺寸不一致
    """
    validate_shapes(field, mask)
    if tuple(field.scales) != tuple(spec.scales):
        return False
    expected = compute_affinity(mask, spec)
    return bool(np.array_equal(field.data, expected.data))


def require_same_layout(a: AffinityField, b: AffinityField) -> None:
    """
    校验两个亲和场的尺寸与槽位布局一致

    Raises:
        ShapeMismatch: 尺寸不一致
        LayoutMismatch: 尺度列表不一致
    """
    if a.shape != b.shape:
        raise ShapeMismatch(a.shape, b.shape, what="AffinityField")
    if tuple(a.scales) != tuple(b.scales):
        raise LayoutMismatch(f"亲和场尺度布局不一致: {list(a.scales)} vs {list(b.scales)}")
