# -*- coding: utf-8 -*-
"""
报告存储模块

本模块负责把命令的输出（JSON 报告、CSV 轨迹）写入输出目录，并维护运行索引。

输出结构：
{out_dir}/
├── index.json              # 运行索引（按配置哈希）
├── {command}.json          # 命令报告
└── {command}.csv           # 轨迹/数据表（如有）

报告公共字段：
{
    "command": "evolve",
    "config_hash": "md5...",     # 有效配置规范化 JSON 的 md5
    "tool_version": "1.0.0",     # 来自 _manifest.json
    "seed": 0,
    ...
}

主要类：
- ReportStore: 报告存储器

主要函数：
- config_hash: 有效配置的 md5
- tool_version: 读取 _manifest.json 中的版本号

特性：
- 原子写入：临时文件 + os.replace()
- 无时间戳：相同配置与种子得到逐字节相同的输出
- CSV 使用 '.' 小数点、17 位有效数字
- JSON 严格合法：NaN 写为 null，±inf 写为 "inf" / "-inf"

使用示例：
    store = ReportStore("out")
    store.save_json("check", report, config_hash="...", seed=0)
    store.save_csv("evolve", header, rows)

Author: 约瑟夫.k && 白泽
"""
import hashlib
import json
import math
import os
import uuid
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from .config import canonical_json
from .logger import get_logger

logger = get_logger("report_store")

_MANIFEST = Path(__file__).resolve().parent.parent / "_manifest.json"


def config_hash(effective_config: Dict[str, Any]) -> str:
    """有效配置规范化 JSON 的 md5"""
    return hashlib.md5(canonical_json(effective_config).encode("utf-8")).hexdigest()


def tool_version() -> str:
    """_manifest.json 中的版本号，读取失败时为 "unknown" """
    try:
        with open(_MANIFEST, "r", encoding="utf-8") as f:
            return str(json.load(f).get("version", "unknown"))
    except (OSError, json.JSONDecodeError) as e:
        logger.warning(f"[ReportStore] 读取版本号失败: {e}")
        return "unknown"


def format_number(value: Any) -> str:
    """17 位有效数字（整数与字符串原样输出）"""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _to_jsonable(value: Any) -> Any:
    if hasattr(value, "to_dict"):
        return _to_jsonable(value.to_dict())
    if isinstance(value, dict):
        return {str(k): _to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_jsonable(v) for v in value]
    if hasattr(value, "tolist") and callable(value.tolist):
        return _to_jsonable(value.tolist())
    if isinstance(value, complex):
        return {"re": _to_jsonable(value.real), "im": _to_jsonable(value.imag)}
    if isinstance(value, float) and not math.isfinite(value):
        # NaN 写为 null，±inf 写为字符串（如零温 β）
        if math.isnan(value):
            return None
        return "inf" if value > 0 else "-inf"
    return value


class ReportStore:
    """报告存储器"""

    def __init__(self, out_dir: str):
        """初始化报告存储器

        Args:
            out_dir: 输出目录路径（不存在时创建）
        """
        self.out_dir = Path(out_dir)
        self.index_file = self.out_dir / "index.json"
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.index = self._load_index()

    def _load_index(self) -> Dict[str, Any]:
        if self.index_file.exists():
            try:
                with open(self.index_file, "r", encoding="utf-8") as f:
                    return json.load(f)
            except Exception as e:
                logger.error(f"[ReportStore] 加载索引失败: {e}")
                return {}
        return {}

    def _atomic_write(self, target: Path, text: str) -> None:
        """临时文件 + os.replace() 原子写入"""
        temp_file = target.parent / f"{target.name}.tmp.{uuid.uuid4().hex[:8]}"
        try:
            with open(temp_file, "w", encoding="utf-8", newline="") as f:
                f.write(text)
            os.replace(str(temp_file), str(target))
        finally:
            if temp_file.exists():
                try:
                    temp_file.unlink()
                except OSError:
                    pass

    def _save_index(self) -> None:
        text = json.dumps(self.index, ensure_ascii=False, indent=2, sort_keys=True, allow_nan=False) + "\n"
        self._atomic_write(self.index_file, text)

    def _register(self, digest: Optional[str], command: str, filename: str) -> None:
        if not digest:
            return
        entry = self.index.setdefault(digest, {"files": {}})
        entry["files"][command if filename.endswith(".json") else f"{command}.csv"] = filename
        self._save_index()

    def save_json(self, command: str, report: Dict[str, Any], config_hash: Optional[str] = None,
                  seed: Optional[int] = None) -> Path:
        """保存 JSON 报告，附加 command / config_hash / tool_version / seed

        Returns:
            报告文件路径
        """
        payload = {"command": command, "config_hash": config_hash, "tool_version": tool_version(), "seed": seed}
        payload.update(_to_jsonable(report))
        target = self.out_dir / f"{command}.json"
        text = json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True, allow_nan=False)
        self._atomic_write(target, text + "\n")
        self._register(config_hash, command, target.name)
        logger.debug(f"[ReportStore] 已写入报告: {target}")
        return target

    def save_csv(self, command: str, header: Sequence[str], rows: Sequence[Sequence[Any]],
                 config_hash: Optional[str] = None) -> Path:
        """保存 CSV 表（逗号分隔，'.' 小数点，17 位有效数字）"""
        lines: List[str] = [",".join(header)]
        for row in rows:
            lines.append(",".join(format_number(v) for v in row))
        target = self.out_dir / f"{command}.csv"
        self._atomic_write(target, "\n".join(lines) + "\n")
        self._register(config_hash, command, target.name)
        logger.debug(f"[ReportStore] 已写入 CSV: {target}（{len(rows)} 行）")
        return target

    def load_json(self, command: str) -> Optional[Dict[str, Any]]:
        target = self.out_dir / f"{command}.json"
        if not target.exists():
            return None
        with open(target, "r", encoding="utf-8") as f:
            return json.load(f)
