# -*- coding: utf-8 -*-
"""
日志模块 - 提供统一的结构化日志入口

本模块替代宿主程序的 get_logger，所有模块通过 get_logger(name) 获取
带名称绑定的 structlog 日志器。日志统一输出到 stderr，保证 stdout 与
--out 目录中的报告文件保持可机读、逐字节确定。

主要函数：
- configure_logging: 设置日志级别（可重复调用）
- get_logger: 获取命名日志器

使用示例：
    from .logger import get_logger

    logger = get_logger("generator_factory")
    logger.info("[GeneratorFactory] 构建完成")

依赖：
- structlog: 结构化日志

Author: 约瑟夫.k && 白泽
"""
import logging
import sys

import structlog
from structlog._config import BoundLoggerLazyProxy

_LEVELS = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
}

_configured_level = None


class _StderrProxy:
    """始终写入当前的 sys.stderr"""

    def write(self, text: str) -> int:
        return sys.stderr.write(text)

    def flush(self) -> None:
        sys.stderr.flush()


def configure_logging(level: str = "INFO") -> None:
    """配置全局日志级别

    Args:
        level: DEBUG / INFO / WARNING / ERROR，大小写不敏感
    """
    global _configured_level

    numeric = _LEVELS.get(str(level).upper(), logging.INFO)
    if _configured_level == numeric:
        return

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.dev.ConsoleRenderer(colors=False),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric),
        logger_factory=structlog.PrintLoggerFactory(file=_StderrProxy()),
        cache_logger_on_first_use=False,
    )
    _configured_level = numeric


def get_logger(name: str):
    """获取命名日志器

    Args:
        name: 日志器名称（通常为模块名）

    Returns:
        带 logger 名称的惰性 structlog 日志器，级别随 configure_logging 生效
    """
    if _configured_level is None:
        configure_logging("INFO")
    # structlog.get_logger(logger=...) collides with wrap_logger's own
    # ``logger`` parameter, so build the lazy proxy with the initial value directly.
    return BoundLoggerLazyProxy(None, initial_values={"logger": name})
