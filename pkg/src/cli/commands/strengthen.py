"""特征增强命令"""
from pathlib import Path
from typing import Optional

import click

from cli.common import cli_errors, echo_success
from vessel_affinity.core.strengthening import MU_SCOPES, afn_strengthen, smafs, uafs
from vessel_affinity.utils.aff_container import AffKind, read_aff, write_aff

STRENGTHEN_MODES = ("smafs", "uafs", "afn")


@click.command(name="strengthen")
@click.option(
    "--features",
    required=True,
    type=click.Path(dir_okay=False, path_type=Path),
    help="输入特征图 f_seg（AFF 容器，FEATURE）"
)
@click.option(
    "--aff",
    "aff_path",
    required=True,
    type=click.Path(dir_okay=False, path_type=Path),
    help="预测亲和场（smafs/afn 为多尺度场，uafs 为单尺度 [3] 场）"
)
@click.option(
    "--weights",
    type=click.Path(dir_okay=False, path_type=Path),
    help="多尺度权重 W_M（AFF 容器，WEIGHT；smafs/afn 必需）"
)
@click.option(
    "--single-aff",
    type=click.Path(dir_okay=False, path_type=Path),
    help="单尺度 [3] 亲和场（afn 模式下先做 UAFS）"
)
@click.option(
    "--mode",
    type=click.Choice(STRENGTHEN_MODES, case_sensitive=False),
    default="smafs",
    show_default=True,
    help="增强方式：smafs 多尺度 / uafs 单尺度 / afn 先 UAFS 再 SMAFS"
)
@click.option(
    "--mu-scope",
    type=click.Choice(MU_SCOPES),
    default="joint",
    show_default=True,
    help="平均亲和的计算范围：joint 全部槽位 / per_scale 每个尺度"
)
@click.option(
    "-o", "--output",
    required=True,
    type=click.Path(dir_okay=False, path_type=Path),
    help="输出特征图路径（AFF 容器）"
)
def strengthen(
    features: Path,
    aff_path: Path,
    weights: Optional[Path],
    single_aff: Optional[Path],
    mode: str,
    mu_scope: str,
    output: Path,
):
    """
    亲和引导的特征增强（SMAFS / UAFS / AFN）

    \b
    示例:
        vessaff strengthen --features f.aff --aff pred.aff --weights w.aff -o out.aff
        vessaff strengthen --features f.aff --aff pred3.aff --mode uafs -o out.aff
        vessaff strengthen --features f.aff --aff pred.aff --weights w.aff \\
            --single-aff pred3.aff --mode afn -o out.aff
    """
    mode = mode.lower()
    if mode in ("smafs", "afn") and weights is None:
        raise click.UsageError(f"--mode {mode} 需要 --weights")
    if mode == "afn" and single_aff is None:
        raise click.UsageError("--mode afn 需要 --single-aff")

    with cli_errors():
        feature_map = read_aff(features, AffKind.FEATURE)
        field = read_aff(aff_path, AffKind.AFFINITY)
        if mode == "uafs":
            result = uafs(feature_map, field, mu_scope)
        elif mode == "smafs":
            result = smafs(feature_map, field, read_aff(weights, AffKind.WEIGHT), mu_scope)
        else:
            result = afn_strengthen(
                feature_map,
                field,
                read_aff(weights, AffKind.WEIGHT),
                pred_single=read_aff(single_aff, AffKind.AFFINITY),
                mu_scope=mu_scope,
            )
        write_aff(output, result)
        echo_success(f"增强特征已保存为: {output}（{mode}, {result.channels} 通道）")
