"""评估处理器 - 预测目录与真值目录逐图评估并输出报告"""
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple
import logging

from ..core.base import ProcessorBase, ProgressCallback, VesselIOError
from ..core.metrics import evaluate_topology, pixel_metrics, split_thin_thick, stratified_metrics
from ..core.perturb import ratio_tag
from ..core.types import Mask
from ..utils.file_utils import ensure_directory, pair_by_stem
from ..utils.image_io import read_mask
from ..utils.report import (
    EvalRecord,
    aggregate,
    robustness_curve,
    write_curve,
    write_report,
)
from ..validators.input_validator import validate_ratios, validate_threshold

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvaluationOptions:
    """
    评估参数

    threshold 为拓扑缓冲区阈值（XCAD/PV/DSA 为 2，DRIVE 为 1）；
    binarize 为预测图的二值化阈值（value / 255 >= binarize 视为血管）。
    """

    threshold: float = 2.0
    stratify: bool = False
    thickness_threshold: float = 7.0
    thin_range: float = 5.0
    thick_range: float = 10.0
    binarize: float = 0.5

    def __post_init__(self):
        validate_threshold(self.threshold, "threshold")
        validate_threshold(self.thickness_threshold, "thickness_threshold")
        validate_threshold(self.thin_range, "thin_range")
        validate_threshold(self.thick_range, "thick_range")
        validate_threshold(self.binarize, "binarize")


def evaluate_pair(image_id: str, pred: Mask, gt: Mask, options: Optional[EvaluationOptions] = None) -> EvalRecord:
    """
    单张图像评估：像素级 + 拓扑级（+ 可选的细 / 粗分层）

    Raises:
        ShapeMismatch: 预测与真值尺寸不一致
    """
    options = options or EvaluationOptions()
    pixel = pixel_metrics(pred, gt)
    topo, match = evaluate_topology(pred, gt, options.threshold)
    strata = None
    if options.stratify:
        split = split_thin_thick(gt, options.thickness_threshold)
        strata = stratified_metrics(pred, split, options.thin_range, options.thick_range)
    if pixel.flags or topo.flags:
        logger.warning(f"{image_id}: 存在退化分母 {list(pixel.flags) + list(topo.flags)}")
    return EvalRecord(image_id=image_id, pixel=pixel, topo=topo, match=match, strata=strata)


def evaluate_directory(
    pred_dir: Path,
    gt_dir: Path,
    options: EvaluationOptions,
    jobs: int = 1,
    progress_callback: Optional[ProgressCallback] = None,
) -> List[EvalRecord]:
    """
    按文件名配对后并发评估

    Returns:
        按 image_id 排序的记录列表
    """
    pairs = pair_by_stem(pred_dir, gt_dir)
    logger.info(f"评估 {len(pairs)} 对图像: {pred_dir} vs {gt_dir}")

    def work(pair: Tuple[str, Path, Path]) -> EvalRecord:
        image_id, pred_path, gt_path = pair
        pred = read_mask(pred_path, options.binarize)
        gt = read_mask(gt_path)
        return evaluate_pair(image_id, pred, gt, options)

    records = ProcessorBase._run_jobs(pairs, work, jobs, progress_callback)
    return sorted(records, key=lambda r: r.image_id)


class EvaluationProcessor(ProcessorBase):
    """目录级评估：写出 report.json 与 report.csv"""

    def __init__(
        self,
        pred_dir: Path,
        gt_dir: Path,
        output_path: Path,
        options: Optional[EvaluationOptions] = None,
        aggregate_mode: str = "mean",
        jobs: int = 1,
    ):
        """
        初始化评估处理器

        Args:
            pred_dir: 预测目录
            gt_dir: 真值目录
            output_path: 报告输出目录
            options: 评估参数
            aggregate_mode: mean / pooled
            jobs: 并发数
        """
        super().__init__(pred_dir, output_path)
        self.gt_dir = Path(gt_dir)
        if not self.gt_dir.exists():
            raise VesselIOError(f"输入路径不存在: {self.gt_dir}")
        self.options = options or EvaluationOptions()
        self.aggregate_mode = aggregate_mode
        self.jobs = jobs
        self.records: List[EvalRecord] = []
        self.summary: Dict[str, Any] = {}

    def process(self, progress_callback: Optional[ProgressCallback] = None, **kwargs) -> Path:
        self.records = evaluate_directory(self.input_path, self.gt_dir, self.options, self.jobs, progress_callback)
        self.summary = aggregate(self.records, self.aggregate_mode)
        self._ensure_output_dir()
        write_report(self.records, self.summary, self.output_path / "report.json", "json")
        write_report(self.records, self.summary, self.output_path / "report.csv", "csv")
        logger.info(f"评估完成: {len(self.records)} 张图像，汇总方式 {self.aggregate_mode}")
        return self.output_path


class SweepEvaluationProcessor(ProcessorBase):
    """
    对比度鲁棒性评估

    预测根目录下每个比例一个子目录（例如 r1.7/、r0.85/），分别与同一真值目录比较，
    输出 curve.json 与 curve.csv。
    """

    def __init__(
        self,
        pred_root: Path,
        gt_dir: Path,
        output_path: Path,
        ratios: Sequence[float],
        options: Optional[EvaluationOptions] = None,
        aggregate_mode: str = "mean",
        jobs: int = 1,
    ):
        super().__init__(pred_root, output_path)
        self.gt_dir = Path(gt_dir)
        if not self.gt_dir.exists():
            raise VesselIOError(f"输入路径不存在: {self.gt_dir}")
        self.ratios = validate_ratios(ratios)
        self.options = options or EvaluationOptions()
        self.aggregate_mode = aggregate_mode
        self.jobs = jobs
        self.rows: List[Dict[str, Any]] = []

    def process(self, progress_callback: Optional[ProgressCallback] = None, **kwargs) -> Path:
        per_ratio = []
        for index, ratio in enumerate(self.ratios):
            ratio_dir = self.input_path / ratio_tag(ratio)
            if not ratio_dir.is_dir():
                raise VesselIOError(f"缺少比例 {ratio} 的预测目录: {ratio_dir}")
            records = evaluate_directory(ratio_dir, self.gt_dir, self.options, self.jobs)
            per_ratio.append((ratio, records))
            if progress_callback:
                progress_callback((index + 1) / len(self.ratios))

        self.rows = robustness_curve(per_ratio, self.aggregate_mode)
        ensure_directory(self.output_path)
        write_curve(self.rows, self.output_path / "curve.json", "json")
        write_curve(self.rows, self.output_path / "curve.csv", "csv")
        logger.info(f"鲁棒性曲线完成: {len(self.rows)} 个比例")
        return self.output_path
