"""自检命令"""
from typing import Optional

import click

from cli.common import EXIT_VALIDATION, cli_errors, jobs_option, resolve_jobs
from vessel_affinity.processors.self_check import SelfCheckRunner


@click.command(name="selfcheck")
@click.option("--seed", type=int, default=0, show_default=True, help="随机种子")
@jobs_option
@click.pass_context
def selfcheck(ctx: click.Context, seed: int, jobs: Optional[int]):
    """
    运行有限差分与暴力实现比对，逐项输出 PASS / FAIL

    任一项失败时退出码为 1。

    \b
    示例:
        vessaff selfcheck
        vessaff selfcheck --seed 3 --jobs 1
    """
    with cli_errors():
        runner = SelfCheckRunner(seed=seed, jobs=resolve_jobs(jobs))
        for result in runner.run():
            line = result.line()
            click.echo(click.style(line, fg="green" if result.passed else "red"))

    if not runner.passed:
        click.echo(click.style("✗ 自检未通过", fg="red"), err=True)
        ctx.exit(EXIT_VALIDATION)
    click.echo(click.style(f"✓ 全部 {len(runner.results)} 项自检通过", fg="green"), err=True)
