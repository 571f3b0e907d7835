"""
终端输出 - 日志初始化与运行汇总/配置的 rich 渲染
"""

import logging
from typing import Any, Dict, Mapping, Optional

from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

LOGGER_NAME = "sodelab"

# 库模块的 logger 名称（src.xxx）也挂到同一处理器上
_PACKAGE_LOGGERS = (LOGGER_NAME, "src")


def setup_logging(level: str = "WARNING", console: Optional[Console] = None) -> logging.Logger:
    """在 sodelab 日志命名空间上安装 RichHandler"""
    numeric = logging.getLevelName(str(level).upper())
    if not isinstance(numeric, int):
        numeric = logging.WARNING
    handler = RichHandler(
        console=console or Console(stderr=True),
        show_path=False,
        rich_tracebacks=False,
        markup=False,
    )
    handler.setFormatter(logging.Formatter("%(message)s"))
    for name in _PACKAGE_LOGGERS:
        logger = logging.getLogger(name)
        logger.handlers.clear()
        logger.addHandler(handler)
        logger.setLevel(numeric)
    return logging.getLogger(LOGGER_NAME)


def _cell(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "✅" if value else "❌"
    if isinstance(value, float):
        return format(value, ".6g")
    if isinstance(value, (list, tuple)):
        return ", ".join(_cell(v) for v in value)
    if isinstance(value, dict):
        return ", ".join(f"{k}={_cell(v)}" for k, v in value.items())
    return str(value)


def render_summary(summary: Mapping[str, Any], console: Console) -> None:
    """把一次运行的汇总渲染为 Panel + Table"""
    violations = int(summary.get("violations", 0))
    status = Text()
    if violations:
        status.append(f"❌ 检查未通过：{violations} 处违例", style="bold red")
    else:
        status.append("✅ 所有检查通过", style="bold green")

    info = Table(show_header=False, box=None)
    info.add_column("项目", style="cyan")
    info.add_column("值", style="white")
    for key in ("scenario", "variant", "seed", "samples", "channel", "qubit", "rows", "skipped"):
        if summary.get(key) is not None:
            info.add_row(key, _cell(summary[key]))

    ranges = Table(title="数值范围", header_style="bold magenta")
    ranges.add_column("列", style="cyan")
    ranges.add_column("最小值", style="yellow", justify="right")
    ranges.add_column("最大值", style="yellow", justify="right")
    for name, (low, high) in summary.get("ranges", {}).items():
        ranges.add_row(name, _cell(low), _cell(high))

    checks = Table(title="检查项", header_style="bold magenta")
    checks.add_column("检查", style="cyan")
    checks.add_column("结果", style="green")
    for name, value in summary.get("checks", {}).items():
        # 分箱明细只写入 summary.json
        if isinstance(value, list) and value and isinstance(value[0], dict):
            continue
        style = "bold red" if name == "violations" and value else None
        checks.add_row(name, Text(_cell(value), style=style or ""))

    console.print(Panel(info, title=f"🔬 场景 {summary.get('scenario')}", border_style="magenta"))
    console.print(ranges)
    console.print(checks)
    console.print(status)


def render_config(defaults: Mapping[str, Any], console: Console) -> None:
    """把默认配置渲染为表格：一行全局默认，每个场景一行覆盖项"""
    table = Table(title="场景默认配置", header_style="bold magenta")
    table.add_column("场景", style="cyan")
    table.add_column("配置", style="green")

    base: Dict[str, Any] = dict(defaults.get("defaults", {}))
    table.add_row("defaults", _cell(base))
    for name, block in defaults.get("scenarios", {}).items():
        table.add_row(name, _cell(block))
    console.print(Panel(table, title="⚙️ SoDELab 配置", border_style="cyan"))


def render_scenarios(scenarios: Mapping[str, Any], console: Console) -> None:
    """列出所有可用场景"""
    table = Table(title="可用场景", header_style="bold magenta")
    table.add_column("场景", style="cyan")
    table.add_column("变体", style="yellow")
    table.add_column("说明", style="white")
    for name, scenario in scenarios.items():
        table.add_row(name, "|".join(scenario.variants) or "-", scenario.description)
    console.print(table)
