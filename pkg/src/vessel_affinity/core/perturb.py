"""
对比度扰动

I_contrast(x) = I_average + (I(x) - I_average) · ratio

库内默认不截断（保持复合性质可测），写文件时由调用方开启截断到 [0, 255]。
"""
from dataclasses import dataclass
from typing import List, Sequence, Tuple
import logging

import numpy as np

from .base import InvalidRatio
from .types import Grayscale
from ..validators.input_validator import validate_ratios

logger = logging.getLogger(__name__)

CHANNEL_MODES = ("luminance", "per-channel")

# 发表的两组对比度比例：XCAD（PV / DSA 沿用）与 DRIVE
XCAD_RATIOS = (1.7, 1.6, 1.5, 0.9, 0.85, 0.8)
DRIVE_RATIOS = (1.3, 1.2, 1.1, 0.4, 0.3, 0.2)


@dataclass(frozen=True)
class ContrastSweep:
    """对比度比例序列（顺序即输出顺序）"""

    ratios: Tuple[float, ...]
    clamp: bool = False

    def __post_init__(self):
        object.__setattr__(self, "ratios", validate_ratios(self.ratios))

    def __len__(self) -> int:
        return len(self.ratios)


def _check_ratio(ratio: float) -> float:
    return validate_ratios([ratio])[0]


def adjust_contrast(img: Grayscale, ratio: float, clamp: bool = False) -> Grayscale:
    """
    以图像均值为中心做仿射对比度调整

    Args:
        img: 单通道图像
        ratio: 对比度比例（> 0）
        clamp: 是否截断到 [0, 255]

    Returns:
        调整后的图像；ratio == 1.0 时逐位等于输入

    Raises:
        InvalidRatio: ratio <= 0
    """
    ratio = _check_ratio(ratio)
    data = img.data
    if ratio == 1.0:
        out = data.copy()
    else:
        mean = float(np.mean(data)) if data.size else 0.0
        out = mean + (data - mean) * ratio
    if clamp:
        out = np.clip(out, 0.0, 255.0)
    return Grayscale(out)


def adjust_contrast_channels(
    channels: Sequence[Grayscale], ratio: float, clamp: bool = False
) -> Tuple[Grayscale, ...]:
    """彩色图逐通道调整，每个通道使用自己的均值"""
    if not channels:
        raise InvalidRatio("至少需要一个通道")
    return tuple(adjust_contrast(channel, ratio, clamp) for channel in channels)


def sweep(img: Grayscale, contrast_sweep: ContrastSweep) -> List[Tuple[float, Grayscale]]:
    """
    按比例序列生成扰动图像

    Returns:
        [(ratio, image), ...]，顺序与 contrast_sweep.ratios 一致
    """
    results = [(ratio, adjust_contrast(img, ratio, contrast_sweep.clamp)) for ratio in contrast_sweep.ratios]
    logger.debug(f"对比度扫描完成: {len(results)} 个比例")
    return results


def ratio_tag(ratio: float) -> str:
    """文件名中的比例标记，例如 1.7 -> 'r1.7'，0.85 -> 'r0.85'"""
    return f"r{ratio:g}"
