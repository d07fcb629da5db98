"""
逐像素暴力实现

与向量化实现完全独立，只依赖定义本身（显式越界判断、逐项循环），
供测试与 selfcheck 做逐位比对。只适用于小尺寸输入。
"""
from typing import Sequence, Tuple
import math

import numpy as np

from .types import DIRECTION_UNITS


def _offsets(scales: Sequence[int]):
    for k in scales:
        radius = (k - 1) // 2
        for unit_row, unit_col in DIRECTION_UNITS:
            yield unit_row * radius, unit_col * radius


def brute_force_affinity(labels: np.ndarray, scales: Sequence[int]) -> np.ndarray:
    """双重循环计算亲和场：同类为 1，异类或越界为 0"""
    height, width = labels.shape
    offsets = list(_offsets(scales))
    field = np.zeros((len(offsets), height, width), dtype=np.float64)
    for row in range(height):
        for col in range(width):
            for slot, (dr, dc) in enumerate(offsets):
                nr, nc = row + dr, col + dc
                if 0 <= nr < height and 0 <= nc < width and labels[row, col] == labels[nr, nc]:
                    field[slot, row, col] = 1.0
    return field


def brute_force_select(vector: Sequence[float]) -> Tuple[int, ...]:
    """单个像素向量的硬选择：y >= μ 时为 1（相对容差 1e-12 内视为相等）"""
    values = [float(v) for v in vector]
    mu = math.fsum(values) / len(values)
    tol = 1e-12 * max(1.0, abs(mu))
    return tuple(1 if value - mu >= -tol else 0 for value in values)


def brute_force_smafs(
    features: np.ndarray,
    pred: np.ndarray,
    weights: np.ndarray,
    scales: Sequence[int],
) -> np.ndarray:
    """三重循环直接求和：f_s(x) = Σ W·d·f(x_l) + f(x)，越界邻居贡献 0"""
    channels, height, width = features.shape
    offsets = list(_offsets(scales))
    out = np.zeros_like(features, dtype=np.float64)
    for row in range(height):
        for col in range(width):
            gates = brute_force_select(pred[:, row, col])
            for channel in range(channels):
                acc = 0.0
                for slot, (dr, dc) in enumerate(offsets):
                    nr, nc = row + dr, col + dc
                    if not (0 <= nr < height and 0 <= nc < width):
                        continue
                    gate = weights[slot // 8, row, col] * gates[slot]
                    acc += gate * features[channel, nr, nc]
                out[channel, row, col] = acc + features[channel, row, col]
    return out


def brute_force_buffer_match(extracted: np.ndarray, reference: np.ndarray, threshold: float) -> Tuple[int, int, int, int]:
    """
    全点对最近距离的缓冲区匹配

    Returns:
        (matched_extracted, unmatched_extracted, matched_reference, unmatched_reference)
    """
    ext_points = list(zip(*np.nonzero(extracted)))
    ref_points = list(zip(*np.nonzero(reference)))

    def matched(points, targets) -> int:
        count = 0
        for r, c in points:
            if any(math.sqrt((r - tr) ** 2 + (c - tc) ** 2) <= threshold for tr, tc in targets):
                count += 1
        return count

    matched_ext = matched(ext_points, ref_points)
    matched_ref = matched(ref_points, ext_points)
    return matched_ext, len(ext_points) - matched_ext, matched_ref, len(ref_points) - matched_ref


def quality_by_counts(tp: int, fp: int, fn: int) -> float:
    """共享 TP 计数时 Quality 的闭式解 TP / (TP + FP + FN)"""
    denom = tp + fp + fn
    return tp / denom if denom else 0.0
