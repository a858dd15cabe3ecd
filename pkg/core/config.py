# -*- coding: utf-8 -*-
"""
配置模块 - 运行配置的 Schema 定义与点分路径读取

本模块提供 JSON 运行配置的加载、Schema 默认值回退、类型校验和命令行覆盖。
Schema 本身在 main.py 中以 ConfigField 字典声明，这里只负责读取。

主要类：
- ConfigField: 单个配置项声明（类型、默认值、说明）
- RunConfig: 运行配置，支持 get_config("section.key", default)

主要函数：
- load_config: 从 JSON 文件加载配置
- canonical_json: 配置的规范化 JSON 文本（用于哈希）

使用示例：
    config = load_config("run.json", schema)
    beta = config.get_config("thermal.beta", 1.0)
    config.set_override("run.seed", 7)

错误处理：
- 文件不存在、JSON 格式错误、类型不符均抛出 ConfigError，并指明出错字段

Author: 约瑟夫.k && 白泽
"""
import copy
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Tuple

from .errors import ConfigError
from .logger import get_logger

logger = get_logger("config")

_MISSING = object()


@dataclass(frozen=True)
class ConfigField:
    """配置项声明"""
    type: type
    default: Any = None
    description: str = ""
    choices: Optional[Tuple[Any, ...]] = None

    def check(self, field: str, value: Any) -> Any:
        """校验并规范化配置值

        int 可以作为 float 使用；bool 不被当作数字。
        """
        if value is None:
            return value
        if self.type is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(field, f"应为数值，实际为 {type(value).__name__}")
            value = float(value)
        elif self.type is int:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(field, f"应为整数，实际为 {type(value).__name__}")
        elif not isinstance(value, self.type):
            raise ConfigError(field, f"应为 {self.type.__name__}，实际为 {type(value).__name__}")
        if self.choices is not None and value not in self.choices:
            raise ConfigError(field, f"取值 {value!r} 不在 {list(self.choices)} 中")
        return value


def _iter_schema(schema: Dict[str, Any], prefix: str = "") -> Iterable[Tuple[str, ConfigField]]:
    for key, value in schema.items():
        path = f"{prefix}.{key}" if prefix else key
        if isinstance(value, ConfigField):
            yield path, value
        else:
            yield from _iter_schema(value, path)


def canonical_json(data: Any) -> str:
    """规范化 JSON 文本（键排序、无多余空白）"""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


class RunConfig:
    """运行配置

    raw 为用户提供的嵌套字典；schema 为 main.py 中声明的 ConfigField 树。
    不在 schema 中的键（例如 generator.params 下的自由参数）原样返回。
    """

    def __init__(self, raw: Optional[Dict[str, Any]] = None, schema: Optional[Dict[str, Any]] = None,
                 source: Optional[str] = None):
        self.raw: Dict[str, Any] = copy.deepcopy(raw) if raw else {}
        self.schema: Dict[str, Any] = schema or {}
        self.source = source
        self._fields: Dict[str, ConfigField] = dict(_iter_schema(self.schema))
        self.validate()

    def validate(self) -> None:
        """校验所有已声明字段的类型"""
        for path, field in self._fields.items():
            value = self._lookup(path)
            if value is not _MISSING:
                field.check(path, value)

    def _lookup(self, key: str) -> Any:
        node: Any = self.raw
        for part in key.split("."):
            if not isinstance(node, dict) or part not in node:
                return _MISSING
            node = node[part]
        return node

    def get_config(self, key: str, default: Any = None) -> Any:
        """按点分路径读取配置

        Args:
            key: 形如 "thermal.beta" 的路径
            default: 缺失且 schema 无默认值时的回退值

        Returns:
            配置值（已按 schema 类型规范化）
        """
        value = self._lookup(key)
        field = self._fields.get(key)
        if value is _MISSING:
            if field is not None and field.default is not None:
                return copy.deepcopy(field.default)
            return default
        if field is not None:
            return field.check(key, value)
        return value

    def require(self, key: str) -> Any:
        """读取必填配置，缺失时抛出 ConfigError"""
        value = self.get_config(key)
        if value is None:
            raise ConfigError(key, "缺少必填配置")
        return value

    def set_override(self, key: str, value: Any) -> None:
        """命令行覆盖配置项"""
        field = self._fields.get(key)
        if field is not None:
            value = field.check(key, value)
        node = self.raw
        parts = key.split(".")
        for part in parts[:-1]:
            child = node.get(part)
            if not isinstance(child, dict):
                child = {}
                node[part] = child
            node = child
        node[parts[-1]] = value
        logger.debug(f"[RunConfig] 覆盖配置 {key}={value!r}")

    def effective(self) -> Dict[str, Any]:
        """合并 schema 默认值后的有效配置（用于哈希与报告）"""
        merged: Dict[str, Any] = {}
        for path, field in self._fields.items():
            value = self.get_config(path)
            if value is None:
                continue
            self._assign(merged, path, value)
        self._merge_extra(merged, self.raw)
        return merged

    @staticmethod
    def _assign(target: Dict[str, Any], path: str, value: Any) -> None:
        parts = path.split(".")
        node = target
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value

    @classmethod
    def _merge_extra(cls, target: Dict[str, Any], raw: Dict[str, Any]) -> None:
        for key, value in raw.items():
            if isinstance(value, dict) and isinstance(target.get(key), dict):
                cls._merge_extra(target[key], value)
            elif key not in target:
                target[key] = copy.deepcopy(value)


def load_config(path: Optional[str], schema: Dict[str, Any]) -> RunConfig:
    """从 JSON 文件加载运行配置

    Args:
        path: 配置文件路径，为 None 时只使用 schema 默认值
        schema: ConfigField 树

    Returns:
        RunConfig

    Raises:
        ConfigError: 文件不存在、JSON 格式错误、顶层不是对象或字段类型不符
    """
    if path is None:
        return RunConfig({}, schema)

    config_path = Path(path)
    if not config_path.exists():
        raise ConfigError("--config", f"配置文件不存在: {path}")
    try:
        with open(config_path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError("--config", f"JSON 解析失败（第{e.lineno}行）: {e.msg}")
    if not isinstance(raw, dict):
        raise ConfigError("--config", "配置文件顶层必须是 JSON 对象")

    logger.debug(f"[RunConfig] 已加载配置: {config_path}")
    return RunConfig(raw, schema, source=str(config_path))
