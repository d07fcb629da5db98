"""
评估指标

像素级：Precision / Recall / F1。
拓扑级：骨架化 + 缓冲区匹配 -> Completeness / Correctness / Quality。
分层协议：按 7 像素厚度把真值分为细 / 粗血管，分别使用 5 / 10 像素搜索范围。
"""
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple
import math
import logging

import numpy as np
from scipy import ndimage
from skimage.morphology import skeletonize as _zhang_skeletonize

from .types import Mask, RealMap, validate_shapes
from ..validators.input_validator import validate_threshold

logger = logging.getLogger(__name__)

STRATA = ("thin", "thick")


@dataclass(frozen=True)
class Confusion:
    """像素混淆计数"""

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class PixelMetrics:
    precision: float
    recall: float
    f1: float
    confusion: Confusion
    flags: Tuple[str, ...] = ()


@dataclass(frozen=True)
class MatchReport:
    """
    缓冲区匹配结果（骨架像素数近似长度）

    matched_extracted / unmatched_extracted 对应 Correctness 的 TP / FP，
    matched_reference / unmatched_reference 对应 Completeness 的 TP / FN。
    """

    matched_extracted: int
    unmatched_extracted: int
    matched_reference: int
    unmatched_reference: int
    threshold: float

    @property
    def extracted_total(self) -> int:
        return self.matched_extracted + self.unmatched_extracted

    @property
    def reference_total(self) -> int:
        return self.matched_reference + self.unmatched_reference

    def __add__(self, other: "MatchReport") -> "MatchReport":
        return MatchReport(
            matched_extracted=self.matched_extracted + other.matched_extracted,
            unmatched_extracted=self.unmatched_extracted + other.unmatched_extracted,
            matched_reference=self.matched_reference + other.matched_reference,
            unmatched_reference=self.unmatched_reference + other.unmatched_reference,
            threshold=self.threshold,
        )


@dataclass(frozen=True)
class TopoMetrics:
    completeness: float
    correctness: float
    quality: float
    flags: Tuple[str, ...] = ()


@dataclass(frozen=True, eq=False)
class ThicknessSplit:
    """细 / 粗血管划分：thin ∧ thick = ∅，thin ∨ thick = 真值血管"""

    thin_mask: Mask
    thick_mask: Mask
    threshold: float = 7.0
    thickness: Optional[RealMap] = None

    def stratum(self, name: str) -> Mask:
        return self.thin_mask if name == "thin" else self.thick_mask

    @property
    def vessel_mask(self) -> Mask:
        return Mask(self.thin_mask.as_bool | self.thick_mask.as_bool)


@dataclass(frozen=True)
class StratumMetrics:
    """单个分层（thin / thick）的指标"""

    name: str
    search_range: float
    f1: float
    correctness: float
    completeness: float
    quality: float
    empty: bool = False
    flags: Tuple[str, ...] = field(default_factory=tuple)
    confusion: Optional[Confusion] = None
    match: Optional[MatchReport] = None


def _ratio(num: int, den: int, flag: str, flags: list) -> float:
    if den == 0:
        flags.append(flag)
        return 0.0
    return num / den


def confusion(pred: Mask, gt: Mask) -> Confusion:
    """统计 TP / FP / FN / TN"""
    validate_shapes(pred, gt)
    p = pred.as_bool
    g = gt.as_bool
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))
    tn = int(p.size - tp - fp - fn)
    return Confusion(tp=tp, fp=fp, fn=fn, tn=tn)


def metrics_from_confusion(counts: Confusion) -> PixelMetrics:
    """由混淆计数计算 Precision / Recall / F1，零分母返回 0 并标记"""
    flags: list = []
    precision = _ratio(counts.tp, counts.tp + counts.fp, "precision_undefined", flags)
    recall = _ratio(counts.tp, counts.tp + counts.fn, "recall_undefined", flags)
    if precision + recall > 0:
        f1 = 2.0 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
        flags.append("f1_undefined")
    return PixelMetrics(precision=precision, recall=recall, f1=f1, confusion=counts, flags=tuple(flags))


def pixel_metrics(pred: Mask, gt: Mask) -> PixelMetrics:
    """
    像素级 Precision / Recall / F1

    Raises:
        ShapeMismatch: 尺寸不一致
    """
    return metrics_from_confusion(confusion(pred, gt))


def skeletonize(mask: Mask) -> Mask:
    """
    Zhang-Suen 两子迭代细化，得到单像素宽、8 连通的骨架

    细化迭代到不动点，因此结果幂等，且保持 8 连通分量数。
    """
    if mask.count() == 0:
        return Mask.empty(mask.height, mask.width)
    skeleton = _zhang_skeletonize(mask.as_bool, method="zhang")
    return Mask(skeleton)


def distance_to(mask: Mask) -> np.ndarray:
    """每个像素到 mask 中最近前景像素的欧氏距离；mask 为空时为 +inf"""
    target = mask.as_bool
    if not target.any():
        return np.full(target.shape, np.inf)
    return ndimage.distance_transform_edt(~target)


def buffer_match(extracted_skel: Mask, reference_skel: Mask, threshold: float) -> MatchReport:
    """
    双向缓冲区匹配

    提取像素到最近参考像素的欧氏距离 <= threshold 记为匹配（Correctness 方向）；
    参考像素到最近提取像素的距离 <= threshold 记为匹配（Completeness 方向）。

    Raises:
        ShapeMismatch: 尺寸不一致
    """
    validate_shapes(extracted_skel, reference_skel)
    threshold = validate_threshold(threshold)
    ext = extracted_skel.as_bool
    ref = reference_skel.as_bool

    near_ref = distance_to(reference_skel) <= threshold
    near_ext = distance_to(extracted_skel) <= threshold

    matched_ext = int(np.count_nonzero(ext & near_ref))
    matched_ref = int(np.count_nonzero(ref & near_ext))
    return MatchReport(
        matched_extracted=matched_ext,
        unmatched_extracted=int(np.count_nonzero(ext)) - matched_ext,
        matched_reference=matched_ref,
        unmatched_reference=int(np.count_nonzero(ref)) - matched_ref,
        threshold=threshold,
    )


def quality_from_rates(completeness: float, correctness: float) -> float:
    """Quality = Cp·Cr / (Cp - Cp·Cr + Cr)；分母为 0 时返回 0"""
    product = completeness * correctness
    denom = completeness - product + correctness
    if denom <= 0:
        return 0.0
    return product / denom


def topo_metrics(report: MatchReport) -> TopoMetrics:
    """
    由匹配结果计算 Completeness / Correctness / Quality

    Completeness = 匹配参考长度 / 参考长度；Correctness = 匹配提取长度 / 提取长度。
    """
    flags: list = []
    completeness = _ratio(report.matched_reference, report.reference_total, "completeness_undefined", flags)
    correctness = _ratio(report.matched_extracted, report.extracted_total, "correctness_undefined", flags)
    if completeness - completeness * correctness + correctness <= 0:
        flags.append("quality_undefined")
    quality = quality_from_rates(completeness, correctness)
    return TopoMetrics(completeness=completeness, correctness=correctness, quality=quality, flags=tuple(flags))


def evaluate_topology(pred: Mask, gt: Mask, threshold: float) -> Tuple[TopoMetrics, MatchReport]:
    """骨架化后做缓冲区匹配（pred 为提取数据，gt 为参考数据）"""
    report = buffer_match(skeletonize(pred), skeletonize(gt), threshold)
    return topo_metrics(report), report


def estimate_thickness(gt: Mask) -> RealMap:
    """
    逐像素血管厚度 = 2 x 最近骨架像素处的距离变换值

    图像边界不视为血管边界（与 scipy 距离变换一致）：先按边缘复制填充再骨架化，
    避免触边血管的骨架在边界处分叉。
    """
    vessel = gt.as_bool
    if not vessel.any():
        return RealMap(np.zeros(vessel.shape))
    pad = 2 * int(math.ceil(float(ndimage.distance_transform_edt(vessel).max()))) + 3
    padded = np.pad(vessel, pad, mode="edge")
    depth = ndimage.distance_transform_edt(padded)
    skeleton = _zhang_skeletonize(padded, method="zhang")
    nearest = ndimage.distance_transform_edt(~skeleton, return_distances=False, return_indices=True)
    thickness = 2.0 * depth[nearest[0], nearest[1]]
    thickness = thickness[pad:-pad, pad:-pad]
    return RealMap(np.where(vessel, thickness, 0.0))


def split_thin_thick(gt: Mask, thickness_threshold: float = 7.0) -> ThicknessSplit:
    """
    按厚度阈值划分细 / 粗血管：厚度 < 阈值为细血管，其余为粗血管
    """
    thickness = estimate_thickness(gt)
    vessel = gt.as_bool
    thin = vessel & (thickness.data < thickness_threshold)
    thick = vessel & ~thin
    logger.debug(f"厚度划分: 细血管 {int(thin.sum())} 像素, 粗血管 {int(thick.sum())} 像素")
    return ThicknessSplit(
        thin_mask=Mask(thin),
        thick_mask=Mask(thick),
        threshold=float(thickness_threshold),
        thickness=thickness,
    )


def _empty_stratum(name: str, search_range: float) -> StratumMetrics:
    return StratumMetrics(
        name=name,
        search_range=search_range,
        f1=0.0,
        correctness=0.0,
        completeness=0.0,
        quality=0.0,
        empty=True,
        flags=("empty_stratum",),
    )


def stratified_metrics(
    pred: Mask,
    split: ThicknessSplit,
    thin_range: float = 5.0,
    thick_range: float = 10.0,
) -> Dict[str, StratumMetrics]:
    """
    分层评估

    每个预测像素归属于距它最近的真值像素所在的分层，且只有落在该分层搜索范围内的
    预测像素参与匹配；F1 为参与像素与分层真值的逐像素匹配，拓扑指标以搜索范围为缓冲阈值。

    Returns:
        {"thin": StratumMetrics, "thick": StratumMetrics}

    Raises:
        ShapeMismatch: 尺寸不一致
    """
    validate_shapes(pred, split.thin_mask)
    ranges = {"thin": float(thin_range), "thick": float(thick_range)}
    vessel = split.vessel_mask.as_bool
    if not vessel.any():
        logger.warning("真值为空，分层指标全部标记为空")
        return {name: _empty_stratum(name, ranges[name]) for name in STRATA}

    dist, nearest = ndimage.distance_transform_edt(~vessel, return_indices=True)
    nearest_thin = split.thin_mask.as_bool[nearest[0], nearest[1]]
    predicted = pred.as_bool

    results: Dict[str, StratumMetrics] = {}
    for name in STRATA:
        stratum_gt = split.stratum(name)
        search_range = ranges[name]
        if stratum_gt.count() == 0:
            results[name] = _empty_stratum(name, search_range)
            continue
        owner = nearest_thin if name == "thin" else ~nearest_thin
        stratum_pred = Mask(predicted & owner & (dist <= search_range))

        pixel = pixel_metrics(stratum_pred, stratum_gt)
        topo, report = evaluate_topology(stratum_pred, stratum_gt, search_range)
        results[name] = StratumMetrics(
            name=name,
            search_range=search_range,
            f1=pixel.f1,
            correctness=topo.correctness,
            completeness=topo.completeness,
            quality=topo.quality,
            flags=tuple(pixel.flags) + tuple(topo.flags),
            confusion=pixel.confusion,
            match=report,
        )
    return results
