"""损失分解命令"""
from pathlib import Path
from typing import Optional, Tuple
import json

import click

from cli.common import cli_errors, parse_int_list
from config.settings import settings
from vessel_affinity.core.affinity import NeighborhoodSpec, compute_affinity
from vessel_affinity.core.losses import LossConfig, total_loss
from vessel_affinity.utils.aff_container import AffKind, read_aff
from vessel_affinity.utils.image_io import read_mask, read_prob_map


@click.command(name="loss")
@click.option(
    "--pred-seg",
    required=True,
    type=click.Path(dir_okay=False, path_type=Path),
    help="预测分割概率图（8 位 PGM/PNG，value / 255）"
)
@click.option(
    "--gt-seg",
    required=True,
    type=click.Path(dir_okay=False, path_type=Path),
    help="真值标签图"
)
@click.option(
    "--pred-aff",
    required=True,
    type=click.Path(dir_okay=False, path_type=Path),
    help="预测亲和场（AFF 容器）"
)
@click.option(
    "--gt-aff",
    type=click.Path(dir_okay=False, path_type=Path),
    help="真值亲和场（AFF 容器）；省略时由 --gt-seg 计算"
)
@click.option(
    "--scales",
    callback=parse_int_list,
    help="省略 --gt-aff 时使用的尺度列表（默认与 --pred-aff 一致）"
)
@click.option(
    "--lambda-b",
    type=float,
    default=settings.LAMBDA_B,
    show_default=True,
    help="ACD 项的平衡权重 λ_b"
)
@click.option(
    "--epsilon",
    type=float,
    default=settings.LOSS_EPSILON,
    show_default=True,
    help="log 截断与零向量保护阈值，(0, 1e-6]"
)
def loss(
    pred_seg: Path,
    gt_seg: Path,
    pred_aff: Path,
    gt_aff: Optional[Path],
    scales: Optional[Tuple[int, ...]],
    lambda_b: float,
    epsilon: float,
):
    """
    计算总损失 L_t = BCE_seg + BCE_aff + λ_b · ACD，以 JSON 输出各项分解

    \b
    示例:
        vessaff loss --pred-seg prob.pgm --gt-seg label.pgm --pred-aff pred.aff
        vessaff loss --pred-seg prob.pgm --gt-seg label.pgm \\
            --pred-aff pred.aff --gt-aff label.aff --lambda-b 5
    """
    with cli_errors():
        cfg = LossConfig(lambda_b=lambda_b, epsilon=epsilon)
        pred_field = read_aff(pred_aff, AffKind.AFFINITY)
        gt_mask = read_mask(gt_seg)
        if gt_aff is not None:
            gt_field = read_aff(gt_aff, AffKind.AFFINITY)
        else:
            spec = NeighborhoodSpec(scales or pred_field.scales)
            gt_field = compute_affinity(gt_mask, spec)

        breakdown = total_loss(read_prob_map(pred_seg), gt_mask, pred_field, gt_field, cfg)
        click.echo(json.dumps(breakdown.as_dict(), indent=2))
