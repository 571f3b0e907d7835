#!/usr/bin/env python3
"""
SoDELab - 多比特态解纠缠速度（SoDE）实验工具
按场景生成可复现的数据集与检查汇总
"""

import argparse
import sys
from typing import Any, Dict, List, Optional

from rich.console import Console

from src import __version__
from src.config_loader import build_scenario_config, config_loader
from src.errors import InvalidArgumentError, SodeLabError
from src.experiments import SCENARIOS, run_scenario
from src.reporting import render_scenarios, render_summary, setup_logging


class SodeLabParser(argparse.ArgumentParser):
    """参数错误抛 InvalidArgumentError，由 run() 统一输出单行错误"""

    def error(self, message: str):
        raise InvalidArgumentError(message)


def build_parser() -> argparse.ArgumentParser:
    """构建命令行解析器"""
    parser = SodeLabParser(
        prog="sodelab",
        description="多比特态在局域噪声下的解纠缠速度（SoDE）场景运行器",
    )
    parser.add_argument("scenario", nargs="?", help="场景名称（--list 查看全部）")
    parser.add_argument("--list", action="store_true", help="列出所有场景")
    parser.add_argument("--samples", type=int, help="随机样本数")
    parser.add_argument("--seed", type=int, help="随机种子")
    parser.add_argument("--channel", choices=["depolarizing", "dephasing"], help="局域噪声信道")
    parser.add_argument("--qubit", type=int, help="部分转置所作用的比特")
    parser.add_argument("--out", help="数据集输出路径")
    parser.add_argument("--format", choices=["csv", "json"], help="输出格式")
    parser.add_argument("--dump-states", help="把每个样本的密度矩阵导出为 JSON Lines")
    parser.add_argument("--variant", help="场景变体（twoparam: C|SL|Itot，scatter3: sym|gen）")
    parser.add_argument("--k", type=int, nargs="+", help="比特数列表")
    parser.add_argument("--q-step", type=float, help="q 网格步长")
    parser.add_argument("--phi-points", type=int, help="φ 网格点数")
    parser.add_argument("--grid-points", type=int, help="参数网格点数")
    parser.add_argument("--dt", type=float, help="有限差分时间步")
    parser.add_argument("--workers", type=int, help="并行进程数")
    parser.add_argument("--config", help="用户配置文件（.toml 或 .json）")
    parser.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="日志级别")
    parser.add_argument("-v", "--verbose", action="store_true", help="等价于 --log-level INFO")
    parser.add_argument("--quiet", action="store_true", help="不输出汇总表格")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def cli_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """命令行参数转为配置覆盖项（未给出的参数为 None）"""
    return {
        "samples": args.samples,
        "seed": args.seed,
        "channel": args.channel,
        "qubit": args.qubit,
        "out": args.out,
        "format": args.format,
        "variant": args.variant,
        "k": args.k,
        "q_step": args.q_step,
        "phi_points": args.phi_points,
        "grid_points": args.grid_points,
        "dt": args.dt,
        "workers": args.workers,
        "dump_states": args.dump_states,
    }


def run(argv: Optional[List[str]] = None, console: Optional[Console] = None) -> int:
    """运行命令行，返回退出码"""
    console = console or Console()
    try:
        args = build_parser().parse_args(argv)
    except SodeLabError as exc:
        print(f"sodelab: {exc.one_line()}", file=sys.stderr)
        return 2
    setup_logging("INFO" if args.verbose and args.log_level == "WARNING" else args.log_level)

    if args.list:
        render_scenarios(SCENARIOS, console)
        return 0
    if not args.scenario:
        print("sodelab: error=invalid-argument message=缺少场景名称（--list 查看全部）", file=sys.stderr)
        return 2

    try:
        defaults = config_loader.load_defaults()
        user_config = config_loader.load_user_config(args.config) if args.config else None
        config = build_scenario_config(args.scenario, defaults, user_config, cli_overrides(args))
        result = run_scenario(config)
    except SodeLabError as exc:
        print(f"sodelab: {exc.one_line()}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        message = " ".join(str(exc).split())
        print(f"sodelab: error=internal message={type(exc).__name__}: {message}", file=sys.stderr)
        return 1

    if not args.quiet:
        render_summary(result.summary, console)
        if result.path:
            console.print(f"[bold green]✅ 数据集已写入 {result.path}[/bold green]")
        if result.states_path:
            console.print(f"[bold green]✅ 态已导出到 {result.states_path}[/bold green]")
    return 0


def main():
    """主函数"""
    sys.exit(run())


if __name__ == "__main__":
    main()
