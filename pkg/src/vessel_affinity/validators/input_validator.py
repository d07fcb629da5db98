"""输入验证模块"""
import math
from pathlib import Path
from typing import Iterable, Sequence, Tuple

from ..core.base import (
    InvalidRatio,
    InvalidScale,
    InvalidValue,
    VesselIOError,
)


# 支持的图像格式
SUPPORTED_IMAGE_FORMATS = ['.pgm', '.png']

# AFF 容器扩展名
AFF_SUFFIX = '.aff'


def validate_scales(scales: Iterable[int]) -> Tuple[int, ...]:
    """
    验证亲和场尺度列表

    Args:
        scales: 窗口尺寸列表（例如 [3, 9, 15]）

    Returns:
        规范化后的尺度元组

    Raises:
        InvalidScale: 如果为空、存在偶数或小于 3 的值、或不严格递增
    """
    values = tuple(int(k) for k in scales)
    if not values:
        raise InvalidScale("尺度列表不能为空")
    for k in values:
        if k < 3 or k % 2 == 0:
            raise InvalidScale(f"无效的尺度: {k}（必须为 >= 3 的奇数）")
    for prev, cur in zip(values, values[1:]):
        if cur <= prev:
            raise InvalidScale(f"尺度列表必须严格递增: {list(values)}")
    return values


def validate_ratios(ratios: Sequence[float]) -> Tuple[float, ...]:
    """
    验证对比度比例列表

    Raises:
        InvalidRatio: 如果为空或存在 <= 0 的比例
    """
    values = tuple(float(r) for r in ratios)
    if not values:
        raise InvalidRatio("对比度比例列表不能为空")
    for r in values:
        if not math.isfinite(r) or r <= 0:
            raise InvalidRatio(f"无效的对比度比例: {r}（必须 > 0）")
    return values


def validate_threshold(value: float, name: str = "threshold") -> float:
    """
    验证非负阈值（像素）

    Raises:
        InvalidValue: 如果为负数或非有限值
    """
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise InvalidValue(f"{name} 必须为非负有限数: {value}")
    return value


def validate_input_file(file_path: Path) -> None:
    """
    验证输入文件（图像或 AFF 容器）

    Raises:
        VesselIOError: 如果文件不存在或不是文件
    """
    if not file_path.exists():
        raise VesselIOError(f"文件不存在: {file_path}")

    if not file_path.is_file():
        raise VesselIOError(f"路径不是文件: {file_path}")


def validate_output_path(output_path: Path) -> None:
    """
    验证输出路径（确保父目录可以创建）

    Raises:
        VesselIOError: 如果无法创建输出目录
    """
    try:
        output_path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise VesselIOError(f"无法创建输出目录 {output_path.parent}: {e}")
