"""
合成血管树测试数据

随机二叉分支树：每段为折线上的圆盘扫掠，宽度逐级递减。生成器直接返回自身的
中心线与厚度图，指标测试无需再做骨架估计。所有结果只由 (参数, seed) 决定。
"""
from collections import deque
from dataclasses import dataclass
from typing import List, Tuple
import math
import logging

import numpy as np
from scipy import ndimage
from skimage.draw import line as draw_line
from skimage.morphology import disk

from .base import CanvasTooSmall, InvalidValue
from .metrics import skeletonize
from .types import Grayscale, Mask, RealMap, rng_new

logger = logging.getLogger(__name__)

MIN_CANVAS = 32
# 子分支相对父分支的基础偏转角（度）与宽度衰减系数
SPLIT_ANGLE = 30.0
WIDTH_TAPER = 0.75

_EIGHT_NEIGHBORS = np.array([[1, 1, 1], [1, 0, 1], [1, 1, 1]], dtype=np.int32)


@dataclass(frozen=True)
class TreeParams:
    """
    合成血管树参数

    canvas 为 (width, height)；width_range 为像素宽度区间（取奇数宽度）；
    branch_angle_jitter 为分支角随机扰动（度）。
    """

    seed: int = 0
    canvas: Tuple[int, int] = (64, 64)
    branch_count: int = 7
    width_range: Tuple[int, int] = (1, 7)
    branch_angle_jitter: float = 15.0
    segment_length_range: Tuple[float, float] = (12.0, 24.0)

    def __post_init__(self):
        width, height = self.canvas
        if width < MIN_CANVAS or height < MIN_CANVAS:
            raise CanvasTooSmall(f"画布至少为 {MIN_CANVAS}x{MIN_CANVAS}，实际为 {width}x{height}")
        if self.branch_count < 1:
            raise InvalidValue(f"branch_count 必须 >= 1: {self.branch_count}")
        low, high = self.width_range
        if low < 1 or high < low:
            raise InvalidValue(f"无效的宽度区间: {self.width_range}（最小宽度 >= 1）")
        seg_low, seg_high = self.segment_length_range
        if seg_low <= 0 or seg_high < seg_low:
            raise InvalidValue(f"无效的分段长度区间: {self.segment_length_range}")
        if self.branch_angle_jitter < 0:
            raise InvalidValue(f"branch_angle_jitter 必须 >= 0: {self.branch_angle_jitter}")


@dataclass(frozen=True, eq=False)
class SyntheticTree:
    mask: Mask
    skeleton: Mask
    thickness: RealMap

    def __iter__(self):
        return iter((self.mask, self.skeleton, self.thickness))


@dataclass
class _Segment:
    start: Tuple[float, float]
    angle: float
    width: int


def _odd_width(value: float, low: int) -> int:
    width = max(low, int(round(value)))
    if width % 2:
        return width
    return width - 1 if width - 1 >= low else width + 1


def _clip_end(start, angle: float, length: float, height: int, width: int, margin: int) -> Tuple[float, float]:
    row = start[0] + math.cos(angle) * length
    col = start[1] + math.sin(angle) * length
    row = min(max(row, margin), height - 1 - margin)
    col = min(max(col, margin), width - 1 - margin)
    return row, col


def generate_tree(params: TreeParams) -> SyntheticTree:
    """
    生成合成血管树

    Returns:
        SyntheticTree(mask, skeleton, thickness)；可解包为三元组
    """
    width, height = params.canvas
    rng = rng_new(params.seed)
    low, high = params.width_range
    max_width = _odd_width(high, low)
    margin = (max_width - 1) // 2 + 1

    mask = np.zeros((height, width), dtype=bool)
    skeleton = np.zeros((height, width), dtype=bool)
    thickness = np.zeros((height, width), dtype=np.float64)

    root_col = width / 2.0 + rng.uniform(-width / 8.0, width / 8.0)
    queue = deque([_Segment(start=(float(margin), root_col), angle=0.0, width=max_width)])
    placed = 0
    while queue and placed < params.branch_count:
        segment = queue.popleft()
        length = rng.uniform(*params.segment_length_range)
        end = _clip_end(segment.start, segment.angle, length, height, width, margin)
        r0, c0 = int(round(segment.start[0])), int(round(segment.start[1]))
        r1, c1 = int(round(end[0])), int(round(end[1]))

        centerline = np.zeros_like(skeleton)
        rr, cc = draw_line(r0, c0, r1, c1)
        centerline[rr, cc] = True
        radius = (segment.width - 1) // 2
        swept = ndimage.binary_dilation(centerline, structure=disk(radius)) if radius else centerline

        skeleton |= centerline
        mask |= swept
        thickness = np.where(swept, np.maximum(thickness, segment.width), thickness)
        placed += 1

        child_width = _odd_width(segment.width * WIDTH_TAPER, low)
        for side in (-1.0, 1.0):
            jitter = rng.uniform(-params.branch_angle_jitter, params.branch_angle_jitter)
            angle = segment.angle + math.radians(side * SPLIT_ANGLE + jitter)
            queue.append(_Segment(start=(float(r1), float(c1)), angle=angle, width=child_width))

    logger.debug(f"合成血管树: seed={params.seed}, 分段={placed}, 血管像素={int(mask.sum())}")
    return SyntheticTree(mask=Mask(mask), skeleton=Mask(skeleton), thickness=RealMap(thickness))


def _stamp_disk(target: np.ndarray, row: int, col: int, radius: float) -> None:
    height, width = target.shape
    reach = int(math.ceil(radius))
    r0, r1 = max(0, row - reach), min(height, row + reach + 1)
    c0, c1 = max(0, col - reach), min(width, col + reach + 1)
    rows, cols = np.ogrid[r0:r1, c0:c1]
    target[r0:r1, c0:c1] |= (rows - row) ** 2 + (cols - col) ** 2 <= radius * radius


def _break_sites(vessel: np.ndarray, break_count: int, rng: np.random.Generator) -> List[Tuple[int, int, float]]:
    skel = skeletonize(Mask(vessel)).as_bool
    neighbors = ndimage.convolve(skel.astype(np.int32), _EIGHT_NEIGHBORS, mode="constant")
    depth = ndimage.distance_transform_edt(vessel)

    # 只在普通路径点上切断，远离端点与分叉点
    special = skel & (neighbors != 2)
    if special.any():
        clearance = ndimage.distance_transform_edt(~special)
    else:
        clearance = np.full(skel.shape, np.inf)

    rows, cols = np.nonzero(skel & (neighbors == 2))
    sites: List[Tuple[int, int, float]] = []
    for index in rng.permutation(rows.size):
        row, col = int(rows[index]), int(cols[index])
        radius = float(depth[row, col]) + 2.0
        if clearance[row, col] <= radius + 1.0:
            continue
        if any(math.hypot(row - r, col - c) <= radius + other + 3.0 for r, c, other in sites):
            continue
        sites.append((row, col, radius))
        if len(sites) == break_count:
            break
    return sites


def degrade(
    mask: Mask,
    seed: int,
    break_count: int = 0,
    dilation: int = 0,
    noise_rate: float = 0.0,
) -> Mask:
    """
    构造受控的伪预测：沿骨架切断（FN / 断连）、膨胀（FP）、孤立噪声点（FP）

    Args:
        mask: 真值血管
        seed: 随机种子
        break_count: 切断数量
        dilation: 膨胀半径（像素）
        noise_rate: 孤立背景像素翻转概率，[0, 1)

    Returns:
        退化后的 Mask
    """
    if not (0.0 <= noise_rate < 1.0):
        raise InvalidValue(f"noise_rate 必须在 [0, 1) 内: {noise_rate}")
    if break_count < 0 or dilation < 0:
        raise InvalidValue(f"break_count 与 dilation 必须 >= 0: {break_count}, {dilation}")

    rng = rng_new(seed)
    out = mask.as_bool.copy()

    if break_count and out.any():
        sites = _break_sites(out, break_count, rng)
        if len(sites) < break_count:
            logger.warning(f"只放置了 {len(sites)}/{break_count} 处切断（血管长度不足）")
        cut = np.zeros_like(out)
        for row, col, radius in sites:
            _stamp_disk(cut, row, col, radius)
        out &= ~cut

    if dilation:
        out = ndimage.binary_dilation(out, structure=disk(dilation))

    if noise_rate > 0:
        crowded = ndimage.binary_dilation(out, structure=np.ones((3, 3), dtype=bool))
        out |= ~crowded & (rng.random(out.shape) < noise_rate)

    return Mask(out)


def render_intensity(mask: Mask, seed: int, contrast: float = 0.5, noise_sigma: float = 0.0) -> Grayscale:
    """
    伪造影图像：背景 255，血管比背景暗 contrast·255，叠加高斯噪声后截断到 [0, 255]
    """
    if not (0.0 < contrast <= 1.0):
        raise InvalidValue(f"contrast 必须在 (0, 1] 内: {contrast}")
    if noise_sigma < 0:
        raise InvalidValue(f"noise_sigma 必须 >= 0: {noise_sigma}")
    image = np.where(mask.as_bool, 255.0 - contrast * 255.0, 255.0)
    if noise_sigma > 0:
        image = image + rng_new(seed).normal(0.0, noise_sigma, image.shape)
    return Grayscale(np.clip(image, 0.0, 255.0))


def count_components(mask: Mask) -> int:
    """8 连通分量数"""
    _, count = ndimage.label(mask.as_bool, structure=np.ones((3, 3), dtype=int))
    return int(count)
