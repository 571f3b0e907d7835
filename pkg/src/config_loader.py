"""
配置加载器 - 从JSON/TOML文件加载场景默认值与用户配置

优先级：内置默认 < config/sodelab_config.json < 用户配置文件 < 命令行参数
"""

import json
import logging
from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    tomllib = None

from .data_models import ChannelKind, OutputFormat, ScenarioConfig
from .errors import ConfigError, SodeLabError

logger = logging.getLogger(__name__)

# 全局键与每个场景块中允许出现的键
GLOBAL_KEYS = ("seed", "channel", "qubit", "format", "workers")
SCENARIO_KEYS = GLOBAL_KEYS + (
    "samples", "variant", "k", "q_step", "phi_points", "grid_points", "dt", "lu_per_state", "out",
    "dump_states",
)

# 配置键到 ScenarioConfig 字段名的映射（其余同名）
_FIELD_NAMES = {"k": "k_values", "format": "fmt"}

BUILTIN_DEFAULTS: Dict[str, Any] = {
    "defaults": {
        "seed": 20240601,
        "channel": "depolarizing",
        "qubit": 0,
        "format": "csv",
        "workers": 1,
        "samples": 1000,
        "k": [3, 4, 5],
        "q_step": 0.05,
        "phi_points": 64,
        "grid_points": 41,
        "dt": 1e-9,
        "lu_per_state": 100,
    },
    "scenarios": {
        "scatter2": {"samples": 30000},
        "validate3": {"samples": 20000},
        "wseries": {"k": [2, 3, 4, 5, 6, 7, 8, 9, 10]},
        "dephasing-check": {"channel": "dephasing", "k": [2, 3, 4, 5, 6]},
    },
}


class ConfigLoader:
    """配置加载器"""

    def __init__(self, config_dir: str = "config"):
        self.config_dir = Path(config_dir)
        self.defaults_file = self.config_dir / "sodelab_config.json"

    def load_defaults(self) -> Dict[str, Any]:
        """加载场景默认配置，文件缺失或损坏时退回内置默认值"""
        try:
            with open(self.defaults_file, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except FileNotFoundError:
            logger.warning("⚠️  默认配置文件 %s 不存在，使用内置默认配置", self.defaults_file)
            return _copy(BUILTIN_DEFAULTS)
        except json.JSONDecodeError as e:
            logger.error("❌ 默认配置文件格式错误: %s", e)
            return _copy(BUILTIN_DEFAULTS)

        errors = self.validate_config(data)
        if errors:
            for error in errors:
                logger.error("❌ %s: %s", self.defaults_file, error)
            return _copy(BUILTIN_DEFAULTS)
        return data

    def load_user_config(self, path: str) -> Dict[str, Any]:
        """加载用户配置（按后缀识别 .toml 或 .json），任何问题都抛出 ConfigError"""
        config_file = Path(path)
        suffix = config_file.suffix.lower()
        try:
            if suffix == ".toml":
                if tomllib is None:
                    raise ConfigError("当前 Python 不支持 TOML（需要 3.11+），请改用 JSON 配置")
                with open(config_file, 'rb') as f:
                    data = tomllib.load(f)
            elif suffix == ".json":
                with open(config_file, 'r', encoding='utf-8') as f:
                    data = json.load(f)
            else:
                raise ConfigError(f"不支持的配置文件类型 path={path}（只支持 .toml/.json）")
        except FileNotFoundError:
            raise ConfigError(f"配置文件不存在 path={path}")
        except OSError as e:
            raise ConfigError(f"无法读取配置文件 path={path}: {e}")
        except (json.JSONDecodeError, ValueError) as e:
            if isinstance(e, SodeLabError):
                raise
            raise ConfigError(f"配置文件格式错误 path={path}: {e}")

        errors = self.validate_config(data)
        if errors:
            raise ConfigError(f"配置文件无效 path={path}: " + "; ".join(errors))
        return data

    def validate_config(self, config_data: Any) -> List[str]:
        """验证配置文件格式，返回错误列表（空列表表示通过）"""
        errors: List[str] = []
        if not isinstance(config_data, dict):
            return ["配置顶层必须是对象"]

        unknown = set(config_data) - {"defaults", "scenarios"}
        for key in sorted(unknown):
            errors.append(f"未知的顶层字段: {key}")

        defaults = config_data.get("defaults", {})
        if not isinstance(defaults, dict):
            errors.append("'defaults' 必须是对象")
        else:
            errors.extend(_validate_block("defaults", defaults))

        scenarios = config_data.get("scenarios", {})
        if not isinstance(scenarios, dict):
            errors.append("'scenarios' 必须是对象")
        else:
            from .experiments import SCENARIOS
            for name, block in scenarios.items():
                if name not in SCENARIOS:
                    errors.append(f"未知场景: {name}")
                elif not isinstance(block, dict):
                    errors.append(f"场景 {name} 的配置必须是对象")
                else:
                    errors.extend(_validate_block(f"scenarios.{name}", block))
        return errors

    def save_user_config(self, config_data: Dict[str, Any], filename: str = "user_config.json") -> bool:
        """保存用户配置"""
        try:
            user_config_file = self.config_dir / filename
            self.config_dir.mkdir(parents=True, exist_ok=True)
            with open(user_config_file, 'w', encoding='utf-8') as f:
                json.dump(config_data, f, ensure_ascii=False, indent=2)
            return True
        except OSError as e:
            logger.error("❌ 保存用户配置时出错: %s", e)
            return False

    def create_sample_config(self, filename: str = "user_config.json") -> Path:
        """创建示例用户配置文件（已存在时不覆盖）"""
        sample_file = self.config_dir / filename
        if not sample_file.exists():
            sample = {
                "defaults": {"seed": 7, "workers": 2},
                "scenarios": {
                    "scatter2": {"samples": 2000, "format": "json"},
                    "zphase": {"k": [5], "phi_points": 32},
                },
            }
            self.save_user_config(sample, filename)
        return sample_file


def _copy(data: Dict[str, Any]) -> Dict[str, Any]:
    return json.loads(json.dumps(data))


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _validate_block(where: str, block: Mapping[str, Any]) -> List[str]:
    errors: List[str] = []
    for key, value in block.items():
        if key not in SCENARIO_KEYS:
            errors.append(f"{where} 包含未知字段: {key}")
            continue
        if key in ("seed", "qubit") and not (_is_int(value) and value >= 0):
            errors.append(f"{where}.{key} 必须是非负整数")
        elif key in ("samples", "workers", "phi_points", "lu_per_state") and not (_is_int(value) and value >= 1):
            errors.append(f"{where}.{key} 必须是正整数")
        elif key == "grid_points" and not (_is_int(value) and value >= 2):
            errors.append(f"{where}.grid_points 必须是 ≥ 2 的整数")
        elif key in ("q_step", "dt") and not (_is_number(value) and value > 0):
            errors.append(f"{where}.{key} 必须是正数")
        elif key == "channel" and value not in [kind.value for kind in ChannelKind]:
            errors.append(f"{where}.channel 必须是 depolarizing|dephasing")
        elif key == "format" and value not in [fmt.value for fmt in OutputFormat]:
            errors.append(f"{where}.format 必须是 csv|json")
        elif key == "k" and not (
            isinstance(value, list) and value and all(_is_int(k) and k >= 2 for k in value)
        ):
            errors.append(f"{where}.k 必须是非空的整数列表（每项 ≥ 2）")
        elif key in ("variant", "out", "dump_states") and not isinstance(value, str):
            errors.append(f"{where}.{key} 必须是字符串")
    return errors


def _layer(config_data: Optional[Mapping[str, Any]], scenario: str) -> Dict[str, Any]:
    if not config_data:
        return {}
    merged = dict(config_data.get("defaults", {}))
    merged.update(config_data.get("scenarios", {}).get(scenario, {}))
    return merged


def build_scenario_config(scenario: str,
                          defaults: Optional[Mapping[str, Any]] = None,
                          user_config: Optional[Mapping[str, Any]] = None,
                          cli_overrides: Optional[Mapping[str, Any]] = None) -> ScenarioConfig:
    """按优先级合并各层配置，生成 ScenarioConfig"""
    merged = _layer(BUILTIN_DEFAULTS, scenario)
    merged.update(_layer(defaults, scenario))
    merged.update(_layer(user_config, scenario))
    merged.update({key: value for key, value in (cli_overrides or {}).items() if value is not None})

    known = {f.name for f in fields(ScenarioConfig)}
    kwargs: Dict[str, Any] = {"scenario": scenario}
    for key, value in merged.items():
        name = _FIELD_NAMES.get(key, key)
        if name not in known:
            raise ConfigError(f"未知的配置项 {key}")
        kwargs[name] = value

    kwargs["channel"] = ChannelKind.parse(kwargs.get("channel", "depolarizing"))
    try:
        kwargs["fmt"] = OutputFormat(str(kwargs.get("fmt", "csv")).lower())
    except ValueError:
        raise ConfigError(f"输出格式必须是 csv|json format={kwargs.get('fmt')}")
    kwargs["k_values"] = tuple(int(k) for k in kwargs.get("k_values", (3, 4, 5)))
    logger.debug("场景 %s 的合并配置: %s", scenario, kwargs)
    return ScenarioConfig(**kwargs)


# 全局配置加载器实例
config_loader = ConfigLoader()
