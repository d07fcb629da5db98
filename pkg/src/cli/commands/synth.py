"""合成数据命令"""
from pathlib import Path
from typing import Optional

import click

from cli.common import cli_errors, echo_success, jobs_option, no_progress_option, resolve_jobs, run_with_progress
from vessel_affinity.core.synthgen import TreeParams
from vessel_affinity.processors.synthesis import DegradeOptions, SynthesisProcessor


@click.command(name="synth")
@click.option(
    "-o", "--out",
    "out_dir",
    required=True,
    type=click.Path(file_okay=False, path_type=Path),
    help="输出目录（mask/ skeleton/ thickness/ image/ 以及可选的 pred/）"
)
@click.option("--seed", type=int, default=0, show_default=True, help="随机种子（第 i 个样本使用 seed + i）")
@click.option("--count", type=int, default=1, show_default=True, help="生成样本数")
@click.option("--width", type=int, default=64, show_default=True, help="画布宽度（>= 32）")
@click.option("--height", type=int, default=64, show_default=True, help="画布高度（>= 32）")
@click.option("--branches", type=int, default=7, show_default=True, help="分段数")
@click.option("--min-width", type=int, default=1, show_default=True, help="最小血管宽度（像素）")
@click.option("--max-width", type=int, default=7, show_default=True, help="最大血管宽度（像素）")
@click.option("--jitter", type=float, default=15.0, show_default=True, help="分支角随机扰动（度）")
@click.option("--contrast", type=float, default=0.5, show_default=True, help="伪造影图像中血管相对背景的暗度，(0, 1]")
@click.option("--noise-sigma", type=float, default=0.0, show_default=True, help="伪造影图像的高斯噪声标准差")
@click.option("--breaks", type=int, default=0, show_default=True, help="伪预测中的切断数量")
@click.option("--dilation", type=int, default=0, show_default=True, help="伪预测的膨胀半径（像素）")
@click.option("--noise", "noise_rate", type=float, default=0.0, show_default=True, help="伪预测的孤立噪声点概率，[0, 1)")
@jobs_option
@no_progress_option
def synth(
    out_dir: Path,
    seed: int,
    count: int,
    width: int,
    height: int,
    branches: int,
    min_width: int,
    max_width: int,
    jitter: float,
    contrast: float,
    noise_sigma: float,
    breaks: int,
    dilation: int,
    noise_rate: float,
    jobs: Optional[int],
    no_progress: bool,
):
    """
    生成合成血管树测试数据（标签、中心线、厚度图、伪造影图像）

    给出 --breaks / --dilation / --noise 时额外输出退化后的伪预测，
    可直接作为 eval 的输入。

    \b
    示例:
        vessaff synth -o fixtures/ --seed 7 --count 10
        vessaff synth -o fixtures/ --width 128 --height 128 --branches 15 --breaks 4
        vessaff eval --pred fixtures/pred --gt fixtures/mask
    """
    with cli_errors():
        params = TreeParams(
            seed=seed,
            canvas=(width, height),
            branch_count=branches,
            width_range=(min_width, max_width),
            branch_angle_jitter=jitter,
        )
        processor = SynthesisProcessor(
            output_path=out_dir,
            params=params,
            count=count,
            contrast=contrast,
            noise_sigma=noise_sigma,
            degrade_options=DegradeOptions(breaks=breaks, dilation=dilation, noise_rate=noise_rate),
            jobs=resolve_jobs(jobs),
        )
        output_path = run_with_progress(processor.process, no_progress, desc="生成进度")
        echo_success(f"已生成 {len(processor.fixture_ids)} 个合成样本: {output_path}")
