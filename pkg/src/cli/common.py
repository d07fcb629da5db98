"""命令共用的参数解析、进度显示与错误处理"""
from contextlib import contextmanager
from typing import Any, Callable, Iterator, List, Optional, Tuple
import logging
import sys

import click

try:
    from tqdm import tqdm
    HAS_TQDM = True
except ImportError:
    HAS_TQDM = False
    tqdm = None

from config.settings import settings
from vessel_affinity.core.base import VesselIOError, VesselValidationError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


def _split(value: str) -> List[str]:
    return [part.strip() for part in str(value).split(",") if part.strip()]


def parse_int_list(ctx: click.Context, param: click.Parameter, value: Optional[str]) -> Optional[Tuple[int, ...]]:
    """click 回调：'3,9,15' -> (3, 9, 15)"""
    if value is None:
        return None
    try:
        return tuple(int(part) for part in _split(value))
    except ValueError:
        raise click.BadParameter(f"需要逗号分隔的整数列表: {value}")


def parse_float_list(ctx: click.Context, param: click.Parameter, value: Optional[str]) -> Optional[Tuple[float, ...]]:
    """click 回调：'1.7,0.85' -> (1.7, 0.85)"""
    if value is None:
        return None
    try:
        return tuple(float(part) for part in _split(value))
    except ValueError:
        raise click.BadParameter(f"需要逗号分隔的数值列表: {value}")


def pick(explicit: Any, preset: dict, key: str, default: Any) -> Any:
    """显式参数 > 数据集预设 > 内置默认值"""
    if explicit is not None:
        return explicit
    return preset.get(key, default)


def resolve_jobs(jobs: Optional[int]) -> int:
    return max(1, jobs) if jobs else settings.DEFAULT_JOBS


def echo_success(message: str) -> None:
    click.echo(click.style(f"✓ {message}", fg="green"), err=True)


@contextmanager
def cli_errors() -> Iterator[None]:
    """
    把库异常映射为退出码：验证错误 1，文件读写错误 2
    """
    ctx = click.get_current_context()
    try:
        yield
    except VesselValidationError as e:
        click.echo(click.style(f"✗ 错误: {e}", fg="red"), err=True)
        ctx.exit(EXIT_VALIDATION)
    except (VesselIOError, OSError) as e:
        click.echo(click.style(f"✗ 文件错误: {e}", fg="red"), err=True)
        ctx.exit(EXIT_IO)


def run_with_progress(task: Callable[..., Any], no_progress: bool, desc: str = "处理进度") -> Any:
    """
    执行带 progress_callback 参数的任务，进度条输出到 stderr
    """
    if not no_progress and HAS_TQDM:
        with tqdm(total=100, unit='%', desc=desc, ncols=80, file=sys.stderr) as pbar:
            def progress_callback(progress: float):
                pbar.update(int(progress * 100) - pbar.n)

            return task(progress_callback=progress_callback)
    elif not no_progress:
        def progress_callback(progress: float):
            percent = int(progress * 100)
            click.echo(f"\r{desc}: {percent}%", nl=False, err=True)

        result = task(progress_callback=progress_callback)
        click.echo(err=True)
        return result
    return task()


jobs_option = click.option(
    "-j", "--jobs",
    type=int,
    envvar="VESSAFF_JOBS",
    show_envvar=True,
    help="并发数（默认：逻辑核心数）"
)

no_progress_option = click.option(
    "--no-progress",
    is_flag=True,
    help="禁用进度条显示"
)

preset_option = click.option(
    "--preset",
    type=click.Choice(sorted(settings.DATASET_PRESETS), case_sensitive=False),
    help="数据集预设（xcad/drive/pv/dsa），显式参数优先"
)
