"""
监督损失：亲和场余弦距离（ACD）、分割 BCE、亲和场 BCE 以及总损失

L_t = BCE(Y_s, G_s) + BCE(Y_A, G_A) + λ_b · ACD(Y_A, G_A)

所有归约均为均值，求和顺序固定，相同输入的结果逐位可复现。
"""
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Tuple, Union
import math
import logging

import numpy as np

from .base import InvalidValue, ShapeMismatch
from .affinity import require_same_layout
from .types import AffinityField, Mask, ProbMap

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-7

SegmentationLike = Union[ProbMap, Mask, np.ndarray]
BceInput = Union[ProbMap, Mask, AffinityField, np.ndarray]


@dataclass(frozen=True)
class LossConfig:
    """损失超参数：λ_b 平衡权重（默认 5），epsilon 用于 log 截断与零向量保护"""

    lambda_b: float = 5.0
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not math.isfinite(self.lambda_b) or self.lambda_b < 0:
            raise InvalidValue(f"lambda_b 必须为非负数: {self.lambda_b}")
        if not (0 < self.epsilon <= 1e-6):
            raise InvalidValue(f"epsilon 必须在 (0, 1e-6] 内: {self.epsilon}")


@dataclass(frozen=True)
class LossBreakdown:
    """总损失及各项分解"""

    bce_seg: float
    bce_aff: float
    acd: float
    lambda_b: float
    total: float

    def as_dict(self) -> Dict[str, float]:
        return {
            "bce_seg": self.bce_seg,
            "bce_aff": self.bce_aff,
            "acd": self.acd,
            "lambda_b": self.lambda_b,
            "total": self.total,
        }


@dataclass(frozen=True)
class LossGradients:
    """总损失对 pred_seg (H, W) 与 pred_aff (N, H, W) 的偏导"""

    seg: np.ndarray
    aff: np.ndarray


@dataclass(frozen=True)
class GradientCheck:
    """有限差分校验结果"""

    max_rel_error: float
    checked: int
    excluded: int
    worst_index: int

    def passed(self, tolerance: float = 1e-4) -> bool:
        return self.max_rel_error < tolerance


def _values(x: BceInput) -> np.ndarray:
    if isinstance(x, (ProbMap, Mask, AffinityField)):
        return np.asarray(x.data, dtype=np.float64)
    return np.asarray(x, dtype=np.float64)


def _cosine_parts(pred: np.ndarray, truth: np.ndarray, epsilon: float):
    """逐像素余弦相似度；任一向量模长为零（乘积 <= epsilon）的像素相似度记为 0"""
    norm_p = np.sqrt(np.sum(pred * pred, axis=0))
    norm_t = np.sqrt(np.sum(truth * truth, axis=0))
    dot = np.sum(pred * truth, axis=0)
    denom = norm_p * norm_t
    active = denom > epsilon
    sim = np.zeros_like(dot)
    np.divide(dot, denom, out=sim, where=active)
    return sim, norm_p, norm_t, active


def _acd_terms(pred: np.ndarray, truth: np.ndarray, epsilon: float) -> np.ndarray:
    sim, _, _, _ = _cosine_parts(pred, truth, epsilon)
    # 非负向量的余弦落在 [0, 1]，截断只吸收舍入误差
    return 1.0 - np.clip(sim, 0.0, 1.0)


def _bce_terms(pred: np.ndarray, truth: np.ndarray, epsilon: float) -> np.ndarray:
    p = np.clip(pred, epsilon, 1.0 - epsilon)
    return -(truth * np.log(p) + (1.0 - truth) * np.log(1.0 - p))


def _bce_grad(pred: np.ndarray, truth: np.ndarray, epsilon: float) -> np.ndarray:
    p = np.clip(pred, epsilon, 1.0 - epsilon)
    grad = -truth / p + (1.0 - truth) / (1.0 - p)
    # 截断区间外导数为 0
    inside = (pred > epsilon) & (pred < 1.0 - epsilon)
    return np.where(inside, grad, 0.0)


def _acd_grad(pred: np.ndarray, truth: np.ndarray, epsilon: float) -> np.ndarray:
    """d(ACD)/d(pred)，受保护像素的梯度为零向量"""
    sim, norm_p, norm_t, active = _cosine_parts(pred, truth, epsilon)
    pixels = sim.size
    safe_p = np.where(active, norm_p, 1.0)
    safe_t = np.where(active, norm_t, 1.0)
    d_sim = truth / (safe_p * safe_t) - sim * pred / (safe_p * safe_p)
    return np.where(active, -d_sim / pixels, 0.0)


def acd_loss(pred: AffinityField, truth: AffinityField, epsilon: float = DEFAULT_EPSILON) -> float:
    """
    亲和场余弦距离：1 - 逐像素余弦相似度的均值

    Args:
        pred: 预测亲和场 Y_A
        truth: 真值亲和场 G_A（二值）
        epsilon: 零向量保护阈值

    Returns:
        [0, 1] 内的标量

    Raises:
        ShapeMismatch: 尺寸不一致
        LayoutMismatch: 槽位布局不一致
    """
    require_same_layout(pred, truth)
    terms = _acd_terms(pred.data, truth.data, epsilon)
    return float(np.mean(terms))


def bce(pred: BceInput, truth: BceInput, epsilon: float = DEFAULT_EPSILON) -> float:
    """
    二元交叉熵均值（分割图按像素，亲和场按像素-槽位）

    Raises:
        ShapeMismatch: 尺寸不一致
        LayoutMismatch: 亲和场布局不一致
    """
    if isinstance(pred, AffinityField) and isinstance(truth, AffinityField):
        require_same_layout(pred, truth)
    p = _values(pred)
    t = _values(truth)
    if p.shape != t.shape:
        raise ShapeMismatch(p.shape, t.shape, what="BCE 输入")
    return float(np.mean(_bce_terms(p, t, epsilon)))


def _check_total_inputs(pred_seg, gt_seg, pred_aff: AffinityField, gt_aff: AffinityField) -> None:
    require_same_layout(pred_aff, gt_aff)
    seg_shape = _values(pred_seg).shape
    gt_shape = _values(gt_seg).shape
    if seg_shape != gt_shape:
        raise ShapeMismatch(seg_shape, gt_shape, what="分割图")
    if seg_shape != pred_aff.shape:
        raise ShapeMismatch(seg_shape, pred_aff.shape, what="分割图与亲和场")


def total_loss(
    pred_seg: SegmentationLike,
    gt_seg: SegmentationLike,
    pred_aff: AffinityField,
    gt_aff: AffinityField,
    cfg: Optional[LossConfig] = None,
) -> LossBreakdown:
    """
    总损失 L_t = BCE_seg + BCE_aff + λ_b · ACD

    Returns:
        LossBreakdown（包含各项与总和）
    """
    cfg = cfg or LossConfig()
    _check_total_inputs(pred_seg, gt_seg, pred_aff, gt_aff)
    bce_seg = bce(pred_seg, gt_seg, cfg.epsilon)
    bce_aff = bce(pred_aff, gt_aff, cfg.epsilon)
    acd = acd_loss(pred_aff, gt_aff, cfg.epsilon)
    total = bce_seg + bce_aff + cfg.lambda_b * acd
    logger.debug(f"损失分解: bce_seg={bce_seg:.6f}, bce_aff={bce_aff:.6f}, acd={acd:.6f}, total={total:.6f}")
    return LossBreakdown(bce_seg=bce_seg, bce_aff=bce_aff, acd=acd, lambda_b=cfg.lambda_b, total=total)


def grad_total_loss(
    pred_seg: SegmentationLike,
    gt_seg: SegmentationLike,
    pred_aff: AffinityField,
    gt_aff: AffinityField,
    cfg: Optional[LossConfig] = None,
) -> LossGradients:
    """
    总损失对预测分割图与预测亲和场的解析梯度

    Returns:
        LossGradients，形状与输入一致
    """
    cfg = cfg or LossConfig()
    _check_total_inputs(pred_seg, gt_seg, pred_aff, gt_aff)
    objective = TotalLossObjective(_values(gt_seg), gt_aff.data, cfg)
    return objective.split(objective.gradient(objective.pack(_values(pred_seg), pred_aff.data)))


class TotalLossObjective:
    """
    把 (pred_seg, pred_aff) 展平为一个向量的总损失目标函数

    __call__ 返回各项贡献组成的数组（求和即总损失），供有限差分逐项作差。
    """

    def __init__(self, gt_seg: np.ndarray, gt_aff: np.ndarray, cfg: LossConfig):
        self.gt_seg = np.asarray(gt_seg, dtype=np.float64)
        self.gt_aff = np.asarray(gt_aff, dtype=np.float64)
        self.cfg = cfg
        self.seg_size = self.gt_seg.size

    def pack(self, pred_seg: np.ndarray, pred_aff: np.ndarray) -> np.ndarray:
        return np.concatenate([np.ravel(pred_seg), np.ravel(pred_aff)]).astype(np.float64)

    def unpack(self, point: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        seg = point[: self.seg_size].reshape(self.gt_seg.shape)
        aff = point[self.seg_size:].reshape(self.gt_aff.shape)
        return seg, aff

    def split(self, gradient: np.ndarray) -> LossGradients:
        seg, aff = self.unpack(gradient)
        return LossGradients(seg=seg.copy(), aff=aff.copy())

    def __call__(self, point: np.ndarray) -> np.ndarray:
        seg, aff = self.unpack(point)
        eps = self.cfg.epsilon
        seg_terms = _bce_terms(seg, self.gt_seg, eps) / seg.size
        aff_terms = _bce_terms(aff, self.gt_aff, eps) / aff.size
        acd_terms = self.cfg.lambda_b * _acd_terms(aff, self.gt_aff, eps) / (aff.shape[1] * aff.shape[2])
        return np.concatenate([seg_terms.ravel(), aff_terms.ravel(), acd_terms.ravel()])

    def gradient(self, point: np.ndarray) -> np.ndarray:
        seg, aff = self.unpack(point)
        eps = self.cfg.epsilon
        grad_seg = _bce_grad(seg, self.gt_seg, eps) / seg.size
        grad_aff = _bce_grad(aff, self.gt_aff, eps) / aff.size
        grad_aff = grad_aff + self.cfg.lambda_b * _acd_grad(aff, self.gt_aff, eps)
        return self.pack(grad_seg, grad_aff)

    def nondifferentiable(self, point: np.ndarray, h: float) -> np.ndarray:
        """截断边界 h 范围内的坐标，以及零向量保护生效像素的亲和坐标"""
        eps = self.cfg.epsilon
        near_clamp = (point - h <= eps) | (point + h >= 1.0 - eps)
        _, aff = self.unpack(point)
        _, _, _, active = _cosine_parts(aff, self.gt_aff, eps)
        guarded = np.broadcast_to(~active, aff.shape)
        flags = near_clamp.copy()
        flags[self.seg_size:] |= guarded.ravel()
        return flags


def fd_check(
    loss_fn: Callable[[np.ndarray], Any],
    point: np.ndarray,
    h: float = 1e-6,
    gradient: Optional[np.ndarray] = None,
    exclude: Optional[np.ndarray] = None,
) -> GradientCheck:
    """
    中心差分校验解析梯度

    相对误差 = |analytic - central| / (|analytic| + h)，返回所有坐标上的最大值。
    loss_fn 可以返回标量，也可以返回各项贡献数组（先逐项作差再求和）。

    Args:
        loss_fn: 目标函数；若未给出 gradient，需提供 loss_fn.gradient(point)
        point: 展开点
        h: 差分步长，[1e-8, 1e-3]
        gradient: 解析梯度（可选）
        exclude: 需要跳过的不可导坐标（可选，默认取 loss_fn.nondifferentiable）

    Returns:
        GradientCheck
    """
    if not (1e-8 <= h <= 1e-3):
        raise InvalidValue(f"差分步长 h 必须在 [1e-8, 1e-3] 内: {h}")
    point = np.asarray(point, dtype=np.float64).ravel()
    if gradient is None:
        gradient = loss_fn.gradient(point)
    gradient = np.asarray(gradient, dtype=np.float64).ravel()
    if exclude is None:
        flagger = getattr(loss_fn, "nondifferentiable", None)
        exclude = flagger(point, h) if flagger else np.zeros(point.shape, dtype=bool)
    exclude = np.asarray(exclude, dtype=bool).ravel()

    worst, worst_index, checked = 0.0, -1, 0
    for i in range(point.size):
        if exclude[i]:
            continue
        plus = point.copy()
        minus = point.copy()
        plus[i] += h
        minus[i] -= h
        f_plus = np.asarray(loss_fn(plus), dtype=np.float64)
        f_minus = np.asarray(loss_fn(minus), dtype=np.float64)
        if f_plus.ndim:
            central = math.fsum((f_plus - f_minus).tolist()) / (2.0 * h)
        else:
            central = (float(f_plus) - float(f_minus)) / (2.0 * h)
        error = abs(gradient[i] - central) / (abs(gradient[i]) + h)
        checked += 1
        if error > worst:
            worst, worst_index = error, i

    excluded = int(exclude.sum())
    if excluded:
        logger.debug(f"有限差分跳过 {excluded} 个不可导坐标")
    return GradientCheck(max_rel_error=worst, checked=checked, excluded=excluded, worst_index=worst_index)
