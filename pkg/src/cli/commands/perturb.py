"""对比度扰动命令"""
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
from vessel_affinity.core.perturb import CHANNEL_MODES, ContrastSweep
from vessel_affinity.processors.contrast_sweep import ContrastSweepProcessor


@click.command(name="perturb")
@click.argument("input_path", type=click.Path(path_type=Path))
@click.option(
    "-o", "--output",
    "out_dir",
    required=True,
    type=click.Path(file_okay=False, path_type=Path),
    help="输出目录（文件名为 <stem>_r<ratio>.<ext>）"
)
@click.option(
    "--ratios",
    callback=parse_float_list,
    help="对比度比例列表，逗号分隔，例如 1.7,1.6,1.5,0.9,0.85,0.8"
)
@preset_option
@click.option(
    "--channel-mode",
    type=click.Choice(CHANNEL_MODES),
    default="luminance",
    show_default=True,
    help="luminance 先转灰度 / per-channel 彩色图逐通道调整（输出 PNG）"
)
@jobs_option
@no_progress_option
def perturb(
    input_path: Path,
    out_dir: Path,
    ratios: Optional[Tuple[float, ...]],
    preset: Optional[str],
    channel_mode: str,
    jobs: Optional[int],
    no_progress: bool,
):
    """
    对比度扰动：I' = I_mean + (I - I_mean) · ratio，每个比例输出一张图像

    INPUT_PATH 可以是单个图像文件或图像目录。

    \b
    示例:
        vessaff perturb image.pgm -o sweep/ --preset xcad
        vessaff perturb images/ -o sweep/ --ratios 1.3,1.2,1.1,0.4,0.3,0.2
        vessaff perturb fundus.png -o sweep/ --preset drive --channel-mode per-channel
    """
    with cli_errors():
        preset_values = settings.preset(preset)
        default_ratios = settings.DATASET_PRESETS["xcad"]["ratios"]
        contrast_sweep = ContrastSweep(pick(ratios, preset_values, "ratios", default_ratios))
        processor = ContrastSweepProcessor(
            input_path=input_path,
            output_path=out_dir,
            contrast_sweep=contrast_sweep,
            channel_mode=channel_mode,
            jobs=resolve_jobs(jobs),
        )
        output_path = run_with_progress(processor.process, no_progress)
        echo_success(f"已生成 {len(processor.outputs)} 张扰动图像: {output_path}")
