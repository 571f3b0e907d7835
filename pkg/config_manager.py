#!/usr/bin/env python3
"""
配置管理工具 - 管理SoDELab的场景配置文件
"""

import sys
from typing import List, Optional

from rich.console import Console
from rich.panel import Panel
from rich.prompt import Confirm, Prompt

from src.config_loader import ConfigLoader
from src.errors import ConfigError
from src.reporting import render_config


class ConfigManager:
    """配置管理器"""

    def __init__(self, config_loader: Optional[ConfigLoader] = None, console: Optional[Console] = None):
        self.console = console or Console()
        self.config_loader = config_loader or ConfigLoader()

    def run(self):
        """运行交互式配置管理器"""
        self.console.print(Panel(
            "[bold cyan]🔬 SoDELab 配置管理工具 🔬[/bold cyan]\n\n"
            "查看、验证和创建场景配置",
            border_style="magenta"
        ))

        while True:
            self.console.print("\n[bold cyan]选择操作:[/bold cyan]")
            self.console.print("1. 查看当前默认配置")
            self.console.print("2. 验证配置文件")
            self.console.print("3. 创建示例配置")
            self.console.print("4. 退出")

            choice = Prompt.ask("请选择", choices=["1", "2", "3", "4"])

            if choice == "1":
                self.show_current_config()
            elif choice == "2":
                self.validate_file(Prompt.ask("配置文件路径", default=str(self.config_loader.defaults_file)))
            elif choice == "3":
                if Confirm.ask("这将创建示例配置文件，是否继续？"):
                    self.create_sample_config()
            elif choice == "4":
                self.console.print("[cyan]再见！[/cyan]")
                break

    def show_current_config(self):
        """显示当前默认配置"""
        render_config(self.config_loader.load_defaults(), self.console)

    def validate_file(self, path: str) -> bool:
        """验证配置文件，返回是否通过"""
        self.console.print(f"[bold yellow]🔍 验证配置文件 {path}...[/bold yellow]")
        try:
            self.config_loader.load_user_config(path)
        except ConfigError as e:
            self.console.print("[bold red]❌ 配置错误:[/bold red]")
            for error in e.message.split("; "):
                self.console.print(f"  • {error}")
            return False
        self.console.print("[bold green]✅ 配置文件格式正确[/bold green]")
        return True

    def create_sample_config(self):
        """创建示例配置"""
        path = self.config_loader.create_sample_config()
        self.console.print(f"[bold green]✅ 示例配置文件: {path}[/bold green]")


USAGE = """
SoDELab 配置管理工具

用法:
  python config_manager.py                 # 启动交互式配置管理器
  python config_manager.py show            # 显示默认配置
  python config_manager.py validate PATH   # 验证配置文件
  python config_manager.py init            # 创建示例配置文件
  python config_manager.py --help          # 显示此帮助信息
"""


def main(argv: Optional[List[str]] = None) -> int:
    """主函数"""
    argv = sys.argv[1:] if argv is None else argv
    manager = ConfigManager()

    if not argv:
        manager.run()
        return 0
    command = argv[0]
    if command == "show":
        manager.show_current_config()
    elif command == "validate" and len(argv) == 2:
        return 0 if manager.validate_file(argv[1]) else 2
    elif command == "init":
        manager.create_sample_config()
    else:
        print(USAGE)
        return 0 if command == "--help" else 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
