"""CLI主入口"""
import sys
import logging
from pathlib import Path
from typing import Optional
import click
from config.settings import settings, load_flat_config

# 配置日志（只输出到 stderr，stdout 留给 JSON / CSV）
logging.basicConfig(
    level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    stream=sys.stderr,
)

logger = logging.getLogger(__name__)


class VessaffGroup(click.Group):
    """用法错误退出码为 1（click 默认为 2，2 保留给文件读写错误）"""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.ClickException as e:
            e.show()
            sys.exit(1)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(1)
        sys.exit(rv if isinstance(rv, int) else 0)


def _apply_config(ctx: click.Context, config_path: Path) -> None:
    """把扁平配置文件映射为当前子命令的 default_map，未知键报错"""
    from vessel_affinity.core.base import ConfigError

    command = ctx.command.get_command(ctx, ctx.invoked_subcommand) if ctx.invoked_subcommand else None
    values = load_flat_config(config_path)
    if command is None:
        return
    # 键名既可以是参数名，也可以是长选项名（--pred -> pred_dir）
    aliases = {}
    for param in command.params:
        if not param.name:
            continue
        aliases[param.name] = param.name
        for opt in getattr(param, "opts", []):
            if opt.startswith("--"):
                aliases[opt[2:].replace("-", "_")] = param.name
    unknown = sorted(key for key in values if key not in aliases)
    if unknown:
        raise ConfigError(
            f"配置文件 {config_path} 包含 {ctx.invoked_subcommand} 不支持的参数: {', '.join(unknown)}"
        )
    ctx.default_map = {ctx.invoked_subcommand: {aliases[key]: value for key, value in values.items()}}
    logger.debug(f"已加载配置 {config_path}: {sorted(values)}")


@click.group(cls=VessaffGroup)
@click.version_option(version="0.1.0")
@click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False, path_type=Path),
    help="扁平 key=value 配置文件，键名与子命令参数一致（命令行参数与环境变量优先）"
)
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[Path]):
    """血管亲和场工具 - 亲和场真值、损失、特征增强与拓扑评估"""
    if config_path is None:
        return
    from vessel_affinity.core.base import ConfigError

    if not config_path.is_file():
        click.echo(click.style(f"✗ 文件错误: 配置文件不存在: {config_path}", fg="red"), err=True)
        ctx.exit(2)
    try:
        _apply_config(ctx, config_path)
    except ConfigError as e:
        click.echo(click.style(f"✗ 错误: {e}", fg="red"), err=True)
        ctx.exit(1)


@cli.command()
def info():
    """显示项目信息"""
    click.echo("血管亲和场工具 v0.1.0")
    click.echo(f"默认尺度: {list(settings.DEFAULT_SCALES)}，数据集预设: {', '.join(sorted(settings.DATASET_PRESETS))}")


# 导入并注册命令模块
try:
    from cli.commands.affinity import affinity
    from cli.commands.loss import loss
    from cli.commands.strengthen import strengthen
    from cli.commands.evaluate import evaluate, eval_sweep
    from cli.commands.perturb import perturb
    from cli.commands.synth import synth
    from cli.commands.selfcheck import selfcheck
except ImportError:
    # 如果相对导入失败，尝试绝对导入
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from cli.commands.affinity import affinity
    from cli.commands.loss import loss
    from cli.commands.strengthen import strengthen
    from cli.commands.evaluate import evaluate, eval_sweep
    from cli.commands.perturb import perturb
    from cli.commands.synth import synth
    from cli.commands.selfcheck import selfcheck

for command in (affinity, loss, strengthen, evaluate, eval_sweep, perturb, synth, selfcheck):
    cli.add_command(command)


def main():
    """主函数"""
    cli()


if __name__ == "__main__":
    main()
