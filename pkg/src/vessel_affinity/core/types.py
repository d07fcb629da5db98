"""
稠密数组类型

像素索引约定：(row, col)，原点在左上角，行优先存储。
方向约定："left" = col - Δ，"top" = row - Δ；规范方向顺序为 L, R, T, B, LT, LB, RT, RB。
库内部统一使用 64 位浮点，AFF 容器落盘为 32 位。
所有类型构造后只读，可在线程间共享。
"""
from dataclasses import dataclass
from typing import Any, List, Tuple, Union

import numpy as np

from .base import InvalidValue, ShapeMismatch
from ..validators.input_validator import validate_scales

# 规范方向顺序及其单位偏移 (Δrow, Δcol)
DIRECTIONS: Tuple[str, ...] = ("L", "R", "T", "B", "LT", "LB", "RT", "RB")
DIRECTION_UNITS: Tuple[Tuple[int, int], ...] = (
    (0, -1),
    (0, 1),
    (-1, 0),
    (1, 0),
    (-1, -1),
    (1, -1),
    (-1, 1),
    (1, 1),
)
# 每个方向的反方向下标（L<->R, T<->B, LT<->RB, LB<->RT）
OPPOSITE_DIRECTION: Tuple[int, ...] = (1, 0, 3, 2, 7, 6, 5, 4)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.setflags(write=False)
    return array


def _as_real(data: Any, ndim: int, name: str) -> np.ndarray:
    array = np.array(data, dtype=np.float64, copy=True)
    if array.ndim != ndim:
        raise InvalidValue(f"{name} 需要 {ndim} 维数组，实际为 {array.ndim} 维")
    if not np.all(np.isfinite(array)):
        raise InvalidValue(f"{name} 包含非有限值")
    return _frozen(array)


def _check_unit_interval(array: np.ndarray, name: str) -> None:
    if array.size and (array.min() < 0.0 or array.max() > 1.0):
        raise InvalidValue(f"{name} 的取值必须在 [0, 1] 内")


class _Grid:
    """二维网格的公共属性（最后两维为 H, W）"""

    data: np.ndarray

    @property
    def height(self) -> int:
        return int(self.data.shape[-2])

    @property
    def width(self) -> int:
        return int(self.data.shape[-1])

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.height, self.width)


@dataclass(frozen=True, eq=False)
class Grayscale(_Grid):
    """灰度图像，强度为实数（落盘时为 [0, 255]）"""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _as_real(self.data, 2, "Grayscale"))

    def in_display_range(self) -> bool:
        return bool(self.data.size == 0 or (self.data.min() >= 0.0 and self.data.max() <= 255.0))


@dataclass(frozen=True, eq=False)
class Mask(_Grid):
    """二值标签图（血管=1，背景=0）"""

    data: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.data)
        if raw.ndim != 2:
            raise InvalidValue(f"Mask 需要 2 维数组，实际为 {raw.ndim} 维")
        if raw.dtype == bool:
            array = raw.astype(np.uint8)
        else:
            if np.issubdtype(raw.dtype, np.floating) and not np.all(np.isfinite(raw)):
                raise InvalidValue("Mask 包含非有限值")
            if not np.all((raw == 0) | (raw == 1)):
                raise InvalidValue("Mask 的取值必须为 {0, 1}")
            array = raw.astype(np.uint8)
        object.__setattr__(self, "data", _frozen(array))

    @classmethod
    def empty(cls, height: int, width: int) -> "Mask":
        return cls(np.zeros((height, width), dtype=np.uint8))

    @property
    def as_bool(self) -> np.ndarray:
        return self.data.astype(bool)

    def count(self) -> int:
        return int(self.data.sum())

    def invert(self) -> "Mask":
        return Mask(1 - self.data)


@dataclass(frozen=True, eq=False)
class ProbMap(_Grid):
    """预测分割概率图 Y_s，取值 [0, 1]"""

    data: np.ndarray

    def __post_init__(self):
        array = _as_real(self.data, 2, "ProbMap")
        _check_unit_interval(array, "ProbMap")
        object.__setattr__(self, "data", array)

    def binarize(self, threshold: float = 0.5) -> Mask:
        return Mask(self.data >= threshold)


@dataclass(frozen=True, eq=False)
class RealMap(_Grid):
    """单平面实数图（平均亲和、厚度图等）"""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _as_real(self.data, 2, "RealMap"))


@dataclass(frozen=True, eq=False)
class AffinityField(_Grid):
    """
    多尺度亲和场

    data 形状为 (N, H, W)，N = 8 x len(scales)；槽位顺序为尺度升序，
    每个尺度内按 L, R, T, B, LT, LB, RT, RB 排列。
    """

    scales: Tuple[int, ...]
    data: np.ndarray

    def __post_init__(self):
        scales = validate_scales(self.scales)
        array = _as_real(self.data, 3, "AffinityField")
        if array.shape[0] != 8 * len(scales):
            raise InvalidValue(
                f"AffinityField 槽位数 {array.shape[0]} 与尺度列表 {list(scales)} 不匹配（应为 {8 * len(scales)}）"
            )
        _check_unit_interval(array, "AffinityField")
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "data", array)

    @property
    def slots(self) -> int:
        return int(self.data.shape[0])

    @property
    def layout(self) -> List[Tuple[int, int]]:
        """有序槽位列表 [(尺度 k, 方向下标 0..7), ...]"""
        return [(k, d) for k in self.scales for d in range(len(DIRECTIONS))]

    def is_binary(self) -> bool:
        return bool(np.all((self.data == 0.0) | (self.data == 1.0)))

    def vector(self, row: int, col: int) -> np.ndarray:
        return self.data[:, row, col]


@dataclass(frozen=True, eq=False)
class FeatureMap(_Grid):
    """特征图 f_seg，形状 (C, H, W)"""

    data: np.ndarray

    def __post_init__(self):
        array = _as_real(self.data, 3, "FeatureMap")
        if array.shape[0] < 1:
            raise InvalidValue("FeatureMap 至少需要 1 个通道")
        object.__setattr__(self, "data", array)

    @property
    def channels(self) -> int:
        return int(self.data.shape[0])


@dataclass(frozen=True, eq=False)
class ScaleWeightMap(_Grid):
    """多尺度自适应权重 W_M，每个尺度一个平面，形状 (|S|, H, W)"""

    scales: Tuple[int, ...]
    data: np.ndarray

    def __post_init__(self):
        scales = validate_scales(self.scales)
        array = _as_real(self.data, 3, "ScaleWeightMap")
        if array.shape[0] != len(scales):
            raise InvalidValue(
                f"ScaleWeightMap 平面数 {array.shape[0]} 与尺度数 {len(scales)} 不一致"
            )
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "data", array)

    @classmethod
    def uniform(cls, scales, height: int, width: int, value: float = 1.0) -> "ScaleWeightMap":
        scales = tuple(scales)
        return cls(scales, np.full((len(scales), height, width), value, dtype=np.float64))


AnyGrid = Union[_Grid, np.ndarray]


def _spatial_shape(grid: AnyGrid) -> Tuple[int, int]:
    if isinstance(grid, _Grid):
        return grid.shape
    array = np.asarray(grid)
    return (int(array.shape[-2]), int(array.shape[-1]))


def validate_shapes(a: AnyGrid, b: AnyGrid) -> None:
    """
    校验两个网格的宽高一致

    Raises:
        ShapeMismatch: 宽高不一致时，附带双方尺寸
    """
    shape_a = _spatial_shape(a)
    shape_b = _spatial_shape(b)
    if shape_a != shape_b:
        raise ShapeMismatch(shape_a, shape_b)


def rng_new(seed: int) -> np.random.Generator:
    """相同种子产生相同的随机流（PCG64）"""
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))
