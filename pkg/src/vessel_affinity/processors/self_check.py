"""
自检 - 有限差分与暴力实现比对

每项检查只依赖固定种子，结果与执行顺序和线程数无关。
"""
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple
import math
import logging

import numpy as np

from ..core.affinity import NeighborhoodSpec, compute_affinity, neighbor_offsets, offset_slices
from ..core.base import ProcessorBase, ProgressCallback
from ..core.losses import LossConfig, TotalLossObjective, acd_loss, bce, fd_check
from ..core.metrics import (
    buffer_match,
    evaluate_topology,
    quality_from_rates,
    split_thin_thick,
)
from ..core.oracles import (
    brute_force_affinity,
    brute_force_buffer_match,
    brute_force_smafs,
    quality_by_counts,
)
from ..core.perturb import DRIVE_RATIOS, XCAD_RATIOS, ContrastSweep, adjust_contrast
from ..core.strengthening import select_slots, smafs, smafs_aggregate, uafs
from ..core.synthgen import TreeParams, degrade, generate_tree, render_intensity
from ..core.types import (
    OPPOSITE_DIRECTION,
    AffinityField,
    FeatureMap,
    Mask,
    ScaleWeightMap,
    rng_new,
)

logger = logging.getLogger(__name__)

ORACLE_SCALES = ((3,), (3, 5, 7), (3, 9, 15))
BUFFER_THRESHOLD = 2.0
THICKNESS_THRESHOLD = 7.0


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark} {self.name}: {self.detail}"


def _random_mask(rng: np.random.Generator, max_side: int, density: float = 0.4) -> np.ndarray:
    height, width = (int(v) for v in rng.integers(1, max_side + 1, size=2))
    return (rng.random((height, width)) < density).astype(np.uint8)


def check_affinity_oracle(seed: int) -> CheckResult:
    rng = rng_new(seed)
    mismatched = 0
    for _ in range(100):
        labels = _random_mask(rng, 32)
        for scales in ORACLE_SCALES:
            field = compute_affinity(Mask(labels), NeighborhoodSpec(scales))
            expected = brute_force_affinity(labels, scales)
            mismatched += int(np.count_nonzero(np.any(field.data != expected, axis=(1, 2))))
    return CheckResult("affinity_oracle", mismatched == 0, f"{mismatched} 个槽位不一致 (100 张掩码 x 3 组尺度)")


def check_affinity_symmetry(seed: int) -> CheckResult:
    rng = rng_new(seed)
    violations = 0
    for _ in range(100):
        mask = Mask(_random_mask(rng, 32))
        for scales in ORACLE_SCALES:
            spec = NeighborhoodSpec(scales)
            field = compute_affinity(mask, spec).data
            inverted = compute_affinity(mask.invert(), spec).data
            violations += int(np.count_nonzero(field != inverted))
            # 互惠性：x 看向 x+o 与 x+o 看向 x 一致
            for slot, offset in enumerate(neighbor_offsets(spec)):
                opposite = (slot // 8) * 8 + OPPOSITE_DIRECTION[slot % 8]
                dst, src = offset_slices(offset, mask.height, mask.width)
                violations += int(np.count_nonzero(field[slot][dst] != field[opposite][src]))
    return CheckResult("affinity_symmetry", violations == 0, f"互惠性 / 反转不变性违例 {violations} 处")


def check_loss_gradients(seed: int) -> CheckResult:
    rng = rng_new(seed)
    spec = NeighborhoodSpec((3,))
    cfg = LossConfig()
    worst = 0.0
    for _ in range(50):
        gt_seg = (rng.random((8, 8)) < 0.4).astype(np.float64)
        gt_aff = compute_affinity(Mask(gt_seg.astype(np.uint8)), spec)
        pred_seg = rng.uniform(0.05, 0.95, size=(8, 8))
        pred_aff = rng.uniform(0.05, 0.95, size=gt_aff.data.shape)
        objective = TotalLossObjective(gt_seg, gt_aff.data, cfg)
        result = fd_check(objective, objective.pack(pred_seg, pred_aff), h=1e-6)
        worst = max(worst, result.max_rel_error)
    return CheckResult("loss_gradients", worst < 1e-4, f"最大相对误差 {worst:.3e} (50 个 8x8 实例, h=1e-6)")


def check_loss_anchors(seed: int) -> CheckResult:
    rng = rng_new(seed)
    truth = AffinityField((3,), np.ones((8, 6, 6)))
    rows = rng.integers(0, 2, size=(8, 6, 6)).astype(np.float64)
    rows[0] = 1.0
    nonzero = AffinityField((3,), rows)
    self_distance = max(acd_loss(truth, truth), acd_loss(nonzero, nonzero))

    labels = rng.integers(0, 2, size=(5, 5)).astype(np.float64)
    half = abs(bce(np.full((5, 5), 0.5), labels) - math.log(2.0))

    single_truth = np.zeros((8, 1, 1))
    single_truth[:2] = 1.0
    single_pred = np.zeros((8, 1, 1))
    single_pred[0] = 1.0
    single = acd_loss(AffinityField((3,), single_pred), AffinityField((3,), single_truth))
    single_error = abs(single - (1.0 - 1.0 / math.sqrt(2.0)))

    passed = self_distance < 1e-12 and half < 1e-9 and single_error < 1e-9
    detail = f"acd(t,t)={self_distance:.1e}, |bce(0.5)-ln2|={half:.1e}, 单像素 ACD 误差={single_error:.1e}"
    return CheckResult("loss_anchors", passed, detail)


def _random_strengthening_case(rng: np.random.Generator):
    height, width = (int(v) for v in rng.integers(1, 7, size=2))
    channels = int(rng.integers(1, 4))
    scales = ORACLE_SCALES[int(rng.integers(0, 2))]
    features = rng.normal(0.0, 1.0, size=(channels, height, width))
    pred = rng.random((8 * len(scales), height, width))
    weights = rng.random((len(scales), height, width))
    return scales, features, pred, weights


def check_smafs_oracle(seed: int) -> CheckResult:
    rng = rng_new(seed)
    mismatched = 0
    for _ in range(200):
        scales, features, pred, weights = _random_strengthening_case(rng)
        out = smafs(FeatureMap(features), AffinityField(scales, pred), ScaleWeightMap(scales, weights))
        if not np.array_equal(out.data, brute_force_smafs(features, pred, weights, scales)):
            mismatched += 1
    return CheckResult("smafs_oracle", mismatched == 0, f"{mismatched}/200 个实例与逐项求和不一致")


def check_smafs_identities(seed: int) -> CheckResult:
    rng = rng_new(seed)
    failures = 0
    for _ in range(50):
        height, width = (int(v) for v in rng.integers(1, 9, size=2))
        features = FeatureMap(rng.normal(0.0, 1.0, size=(2, height, width)))
        single = AffinityField((3,), rng.random((8, height, width)))
        unit = ScaleWeightMap.uniform((3,), height, width, 1.0)
        if not np.array_equal(uafs(features, single).data, smafs(features, single, unit).data):
            failures += 1
        zero_weights = ScaleWeightMap.uniform((3,), height, width, 0.0)
        if not np.array_equal(smafs(features, single, zero_weights).data, features.data):
            failures += 1
        no_selection = np.zeros((8, height, width), dtype=np.uint8)
        residual = smafs_aggregate(features.data, no_selection, unit.data, (3,)) + features.data
        if not np.array_equal(residual, features.data):
            failures += 1
    return CheckResult("smafs_identities", failures == 0, f"UAFS 一致性 / 残差恒等违例 {failures} 处")


def check_selection_invariance(seed: int) -> CheckResult:
    rng = rng_new(seed)
    violations = 0
    for _ in range(100):
        vector = rng.random((24, 1))
        base = select_slots(vector)
        for _ in range(20):
            a = rng.uniform(0.1, 10.0)
            b = rng.uniform(-5.0, 5.0)
            if not np.array_equal(select_slots(a * vector + b), base):
                violations += 1
    return CheckResult("selection_invariance", violations == 0, f"仿射变换后选择结果变化 {violations} 次")


def check_quality_algebra(seed: int) -> CheckResult:
    rng = rng_new(seed)
    worst = 0.0
    bound_violations = 0
    for _ in range(1000):
        tp, fp, fn = (int(v) for v in rng.integers(1, 1000, size=3))
        completeness = tp / (tp + fn)
        correctness = tp / (tp + fp)
        quality = quality_from_rates(completeness, correctness)
        worst = max(worst, abs(quality - quality_by_counts(tp, fp, fn)))
        if quality > min(completeness, correctness):
            bound_violations += 1
    anchor = round(quality_from_rates(0.8444, 0.8453), 4)
    passed = worst < 1e-12 and bound_violations == 0 and anchor == 0.7314
    detail = f"闭式误差 {worst:.1e}, 上界违例 {bound_violations}, (0.8444, 0.8453) -> {anchor:.4f}"
    return CheckResult("quality_algebra", passed, detail)


def check_buffer_oracle(seed: int) -> CheckResult:
    rng = rng_new(seed)
    mismatched = 0
    non_monotone = 0
    for _ in range(100):
        height, width = (int(v) for v in rng.integers(4, 65, size=2))
        extracted = Mask(rng.random((height, width)) < 0.03)
        reference = Mask(rng.random((height, width)) < 0.03)
        previous: Optional[Tuple[int, int]] = None
        for threshold in (1.0, 2.0, 3.0):
            report = buffer_match(extracted, reference, threshold)
            counts = (
                report.matched_extracted,
                report.unmatched_extracted,
                report.matched_reference,
                report.unmatched_reference,
            )
            if counts != brute_force_buffer_match(extracted.data, reference.data, threshold):
                mismatched += 1
            current = (report.matched_extracted, report.matched_reference)
            if previous and (current[0] < previous[0] or current[1] < previous[1]):
                non_monotone += 1
            previous = current
    passed = mismatched == 0 and non_monotone == 0
    return CheckResult("buffer_oracle", passed, f"不一致 {mismatched} 次, 阈值单调性违例 {non_monotone} 次")


def check_contrast(seed: int) -> CheckResult:
    worst_mean = 0.0
    worst_compose = 0.0
    identity_failures = 0
    for offset in range(20):
        tree = generate_tree(TreeParams(seed=seed + offset))
        image = render_intensity(tree.mask, seed + offset, noise_sigma=10.0)
        if not np.array_equal(adjust_contrast(image, 1.0).data, image.data):
            identity_failures += 1
        for ratio in (1.7, 0.85, 0.2):
            adjusted = adjust_contrast(image, ratio)
            worst_mean = max(worst_mean, abs(float(adjusted.data.mean()) - float(image.data.mean())))
        composed = adjust_contrast(adjust_contrast(image, 1.3), 0.4)
        direct = adjust_contrast(image, 1.3 * 0.4)
        worst_compose = max(worst_compose, float(np.max(np.abs(composed.data - direct.data))))
    sweeps_ok = all(ContrastSweep(ratios).ratios == ratios for ratios in (XCAD_RATIOS, DRIVE_RATIOS))
    passed = sweeps_ok and identity_failures == 0 and worst_mean < 1e-9 and worst_compose < 1e-9
    detail = f"比例列表 {'OK' if sweeps_ok else '无效'}, 恒等失败 {identity_failures}, 均值偏移 {worst_mean:.1e}, 复合误差 {worst_compose:.1e}"
    return CheckResult("contrast_properties", passed, detail)


def _bar(width: int) -> Mask:
    canvas = np.zeros((32, 64), dtype=np.uint8)
    top = (32 - width) // 2
    canvas[top:top + width, :] = 1
    return Mask(canvas)


def check_thickness_strata(seed: int) -> CheckResult:
    thin_bar = split_thin_thick(_bar(3), THICKNESS_THRESHOLD)
    thick_bar = split_thin_thick(_bar(11), THICKNESS_THRESHOLD)
    bars_ok = (
        thin_bar.thick_mask.count() == 0
        and thin_bar.thin_mask.count() == _bar(3).count()
        and thick_bar.thin_mask.count() == 0
        and thick_bar.thick_mask.count() == _bar(11).count()
    )
    partition_failures = 0
    for offset in range(10):
        gt = generate_tree(TreeParams(seed=seed + offset)).mask
        split = split_thin_thick(gt, THICKNESS_THRESHOLD)
        overlap = split.thin_mask.as_bool & split.thick_mask.as_bool
        if overlap.any() or not np.array_equal(split.vessel_mask.data, gt.data):
            partition_failures += 1
    passed = bars_ok and partition_failures == 0
    return CheckResult("thickness_strata", passed, f"3/11 像素条带分类{'正确' if bars_ok else '错误'}, 划分失败 {partition_failures}")


def check_synthetic_pipeline(seed: int) -> CheckResult:
    params = TreeParams(
        seed=seed,
        canvas=(128, 128),
        branch_count=15,
        width_range=(1, 3),
        segment_length_range=(15.0, 30.0),
    )
    gt = generate_tree(params).mask
    perfect, _ = evaluate_topology(gt, gt, BUFFER_THRESHOLD)
    completeness = []
    for breaks in (0, 2, 4, 8):
        topo, _ = evaluate_topology(degrade(gt, seed, break_count=breaks), gt, BUFFER_THRESHOLD)
        completeness.append(topo.completeness)
    decreasing = all(a > b for a, b in zip(completeness, completeness[1:]))
    perfect_ok = perfect.completeness == perfect.correctness == perfect.quality == 1.0
    detail = "completeness " + " > ".join(f"{c:.4f}" for c in completeness)
    return CheckResult("synthetic_pipeline", decreasing and perfect_ok, detail)


CHECKS: Tuple[Callable[[int], CheckResult], ...] = (
    check_affinity_oracle,
    check_affinity_symmetry,
    check_loss_gradients,
    check_loss_anchors,
    check_smafs_oracle,
    check_smafs_identities,
    check_selection_invariance,
    check_quality_algebra,
    check_buffer_oracle,
    check_contrast,
    check_thickness_strata,
    check_synthetic_pipeline,
)


class SelfCheckRunner:
    """按固定种子运行全部检查"""

    def __init__(self, seed: int = 0, jobs: int = 1):
        self.seed = seed
        self.jobs = jobs
        self.results: List[CheckResult] = []

    @property
    def passed(self) -> bool:
        return bool(self.results) and all(r.passed for r in self.results)

    def _run_one(self, check: Callable[[int], CheckResult]) -> CheckResult:
        try:
            result = check(self.seed)
        except Exception as e:
            logger.exception(f"{check.__name__} 执行异常")
            result = CheckResult(check.__name__.replace("check_", ""), False, f"异常: {e}")
        logger.debug(result.line())
        return result

    def run(self, progress_callback: Optional[ProgressCallback] = None) -> List[CheckResult]:
        logger.info(f"运行 {len(CHECKS)} 项自检 (seed={self.seed}, jobs={self.jobs})")
        self.results = ProcessorBase._run_jobs(list(CHECKS), self._run_one, self.jobs, progress_callback)
        failed = [r.name for r in self.results if not r.passed]
        if failed:
            logger.warning(f"自检未通过: {', '.join(failed)}")
        return self.results
