"""亲和场真值命令"""
from pathlib import Path
from typing import Optional, Tuple

import click

from cli.common import cli_errors, echo_success, parse_int_list, pick, preset_option
from config.settings import settings
from vessel_affinity.core.affinity import NeighborhoodSpec, compute_affinity
from vessel_affinity.utils.aff_container import write_aff
from vessel_affinity.utils.image_io import read_mask
from vessel_affinity.validators import AFF_SUFFIX


@click.command(name="affinity")
@click.argument("mask_file", type=click.Path(dir_okay=False, path_type=Path))
@click.option(
    "-o", "--output",
    type=click.Path(dir_okay=False, path_type=Path),
    help="输出 AFF 文件路径（默认：与输入同目录，后缀改为 .aff）"
)
@click.option(
    "--scales",
    callback=parse_int_list,
    help="尺度列表，逗号分隔的奇数（默认 3,9,15；DRIVE 使用 3,5,7）"
)
@preset_option
@click.option(
    "--binarize",
    type=float,
    default=settings.BINARIZE_THRESHOLD,
    show_default=True,
    help="标签图二值化阈值（value / 255 >= 阈值视为血管）"
)
def affinity(
    mask_file: Path,
    output: Optional[Path],
    scales: Optional[Tuple[int, ...]],
    preset: Optional[str],
    binarize: float,
):
    """
    由血管标签图计算多尺度亲和场真值，写入 AFF 容器

    \b
    示例:
        vessaff affinity label.pgm --scales 3,9,15 -o label.aff
        vessaff affinity label.png --preset drive
    """
    with cli_errors():
        preset_values = settings.preset(preset)
        spec = NeighborhoodSpec(pick(scales, preset_values, "scales", settings.DEFAULT_SCALES))
        output = output or mask_file.with_suffix(AFF_SUFFIX)

        field = compute_affinity(read_mask(mask_file, binarize), spec)
        write_aff(output, field)
        echo_success(f"亲和场已保存为: {output}（{field.slots} 个槽位，尺度 {list(spec.scales)}）")
