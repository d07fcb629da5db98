"""评估命令：逐图评估与对比度鲁棒性曲线"""
from pathlib import Path
from typing import Optional, Tuple

import click

from cli.common import (
    cli_errors,
    echo_success,
    jobs_option,
    no_progress_option,
    parse_float_list,
    pick,
    preset_option,
    resolve_jobs,
    run_with_progress,
)
from config.settings import settings
from vessel_affinity.processors.evaluation import (
    EvaluationOptions,
    EvaluationProcessor,
    SweepEvaluationProcessor,
)
from vessel_affinity.utils.report import AGGREGATE_MODES, METRIC_FIELDS


def _shared_options(func):
    """eval 与 eval-sweep 共用的评估参数"""
    decorators = [
        click.option(
            "--gt",
            "gt_dir",
            required=True,
            type=click.Path(file_okay=False, path_type=Path),
            help="真值标签目录（按文件名与预测配对）"
        ),
        click.option(
            "-o", "--out",
            "out_dir",
            type=click.Path(file_okay=False, path_type=Path),
            help="报告输出目录（默认：output/）"
        ),
        click.option(
            "--threshold",
            type=float,
            help="拓扑缓冲区阈值（像素，默认 2；DRIVE 为 1）"
        ),
        preset_option,
        click.option(
            "--stratify",
            is_flag=True,
            help="额外输出细 / 粗血管分层指标"
        ),
        click.option(
            "--thickness-threshold",
            type=float,
            default=settings.THICKNESS_THRESHOLD,
            show_default=True,
            help="细 / 粗血管厚度分界（像素）"
        ),
        click.option(
            "--thin-range",
            type=float,
            default=settings.THIN_SEARCH_RANGE,
            show_default=True,
            help="细血管搜索范围（像素）"
        ),
        click.option(
            "--thick-range",
            type=float,
            default=settings.THICK_SEARCH_RANGE,
            show_default=True,
            help="粗血管搜索范围（像素）"
        ),
        click.option(
            "--aggregate",
            "aggregate_mode",
            type=click.Choice(AGGREGATE_MODES),
            default="mean",
            show_default=True,
            help="汇总方式：mean 逐图均值 / pooled 合并计数"
        ),
        click.option(
            "--binarize",
            type=float,
            default=settings.BINARIZE_THRESHOLD,
            show_default=True,
            help="预测图二值化阈值（value / 255 >= 阈值视为血管）"
        ),
        jobs_option,
        no_progress_option,
    ]
    for decorator in reversed(decorators):
        func = decorator(func)
    return func


def _options(threshold, preset_values, stratify, thickness_threshold, thin_range, thick_range, binarize) -> EvaluationOptions:
    return EvaluationOptions(
        threshold=pick(threshold, preset_values, "threshold", settings.BUFFER_THRESHOLD),
        stratify=stratify,
        thickness_threshold=thickness_threshold,
        thin_range=thin_range,
        thick_range=thick_range,
        binarize=binarize,
    )


@click.command(name="eval")
@click.option(
    "--pred",
    "pred_dir",
    required=True,
    type=click.Path(file_okay=False, path_type=Path),
    help="预测结果目录"
)
@_shared_options
def evaluate(
    pred_dir: Path,
    gt_dir: Path,
    out_dir: Optional[Path],
    threshold: Optional[float],
    preset: Optional[str],
    stratify: bool,
    thickness_threshold: float,
    thin_range: float,
    thick_range: float,
    aggregate_mode: str,
    binarize: float,
    jobs: Optional[int],
    no_progress: bool,
):
    """
    像素级 + 拓扑级评估，写出 report.json 与 report.csv

    \b
    示例:
        vessaff eval --pred pred/ --gt gt/ -o reports/
        vessaff eval --pred pred/ --gt gt/ --preset drive --stratify
        vessaff eval --pred pred/ --gt gt/ --aggregate pooled --jobs 4
    """
    with cli_errors():
        options = _options(
            threshold, settings.preset(preset), stratify, thickness_threshold, thin_range, thick_range, binarize
        )
        processor = EvaluationProcessor(
            pred_dir=pred_dir,
            gt_dir=gt_dir,
            output_path=out_dir or settings.DEFAULT_OUTPUT_DIR,
            options=options,
            aggregate_mode=aggregate_mode,
            jobs=resolve_jobs(jobs),
        )
        output_path = run_with_progress(processor.process, no_progress, desc="评估进度")

        summary = processor.summary
        for name in METRIC_FIELDS:
            click.echo(f"{name:>12}: {summary[name]:.6f}")
        echo_success(f"评估完成（{summary['count']} 张图像），报告已保存到: {output_path}")


@click.command(name="eval-sweep")
@click.option(
    "--pred-root",
    required=True,
    type=click.Path(file_okay=False, path_type=Path),
    help="预测根目录，每个比例一个子目录（例如 r1.7/、r0.85/）"
)
@click.option(
    "--ratios",
    callback=parse_float_list,
    help="对比度比例列表，逗号分隔（默认取 --preset 或 XCAD 的比例）"
)
@_shared_options
def eval_sweep(
    pred_root: Path,
    ratios: Optional[Tuple[float, ...]],
    gt_dir: Path,
    out_dir: Optional[Path],
    threshold: Optional[float],
    preset: Optional[str],
    stratify: bool,
    thickness_threshold: float,
    thin_range: float,
    thick_range: float,
    aggregate_mode: str,
    binarize: float,
    jobs: Optional[int],
    no_progress: bool,
):
    """
    对比度鲁棒性评估：每个比例的预测目录分别与真值比较，写出 curve.json 与 curve.csv

    \b
    示例:
        vessaff eval-sweep --pred-root sweep/ --gt gt/ --preset xcad -o reports/
        vessaff eval-sweep --pred-root sweep/ --gt gt/ --ratios 1.3,1.2,0.4
    """
    with cli_errors():
        preset_values = settings.preset(preset)
        default_ratios = settings.DATASET_PRESETS["xcad"]["ratios"]
        options = _options(
            threshold, preset_values, stratify, thickness_threshold, thin_range, thick_range, binarize
        )
        processor = SweepEvaluationProcessor(
            pred_root=pred_root,
            gt_dir=gt_dir,
            output_path=out_dir or settings.DEFAULT_OUTPUT_DIR,
            ratios=pick(ratios, preset_values, "ratios", default_ratios),
            options=options,
            aggregate_mode=aggregate_mode,
            jobs=resolve_jobs(jobs),
        )
        output_path = run_with_progress(processor.process, no_progress, desc="评估进度")

        for row in processor.rows:
            click.echo(
                f"r{row['ratio']:g}: completeness={row['completeness']:.6f} "
                f"correctness={row['correctness']:.6f} quality={row['quality']:.6f}"
            )
        echo_success(f"鲁棒性曲线已保存到: {output_path}")
