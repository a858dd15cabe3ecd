# -*- coding: utf-8 -*-
"""
错误工具模块 - 提供统一的错误分类和数值细化重试机制

本模块是整个工具包的错误词汇表，用于处理：
1. 参数/配置错误（不可细化，直接报告）
2. 数值失败（可细化，换更严格的积分器或更细的离散后重试）
3. 命令行退出码映射

错误分类：
- 可细化错误（RefinableError）：积分容差未达标、求积不收敛等
- 不可细化错误（NonRefinableError）：参数非法、基矢不匹配、非完全正定等

错误类型枚举（ErrorType）：
- INVALID_ARGUMENT: 参数非法
- BASIS_MISMATCH: 算符基矢不一致
- NOT_COMPLETELY_POSITIVE: 系数违反完全正定条件
- PRECONDITION: 前置条件不满足
- NUMERIC_FAILURE: 数值积分失败
- QUADRATURE: 自适应求积不收敛
- CONFIG_ERROR: 配置文件错误
- UNKNOWN: 未知错误

主要函数：
- get_friendly_error_message: 获取友好的错误提示
- exit_code_for: 异常 → 进程退出码
- retry_with_refinement: 按细化等级重试数值步骤
- with_refinement: 细化重试装饰器

使用示例：
    result = retry_with_refinement(
        lambda level: integrate(level),
        levels=("expm", "ode"),
    )

    @with_refinement(levels=(60, 250, 1000), keyword="limit")
    def integrate(f, *, limit):
        ...

Author: 约瑟夫.k && 白泽
"""
import functools
from enum import Enum
from typing import Any, Callable, Dict, Optional, Sequence, Set

from .logger import get_logger

logger = get_logger("errors")


class ErrorType(Enum):
    """错误类型枚举"""
    INVALID_ARGUMENT = "invalid_argument"  # 参数非法
    BASIS_MISMATCH = "basis_mismatch"  # 基矢不一致
    NOT_COMPLETELY_POSITIVE = "not_completely_positive"  # 违反 CP 条件
    PRECONDITION = "precondition"  # 前置条件不满足
    NUMERIC_FAILURE = "numeric_failure"  # 数值积分失败
    QUADRATURE = "quadrature"  # 求积不收敛
    CONFIG_ERROR = "config_error"  # 配置错误
    UNKNOWN = "unknown"  # 未知错误


# 可细化重试的错误类型
REFINABLE_ERRORS: Set[ErrorType] = {
    ErrorType.NUMERIC_FAILURE,
    ErrorType.QUADRATURE,
}

# 命令行的友好错误提示
ERROR_MESSAGES = {
    ErrorType.INVALID_ARGUMENT: "参数非法: {detail}",
    ErrorType.BASIS_MISMATCH: "算符基矢不一致: {detail}",
    ErrorType.NOT_COMPLETELY_POSITIVE: "系数不满足完全正定条件（{inequality}，margin={margin}）",
    ErrorType.PRECONDITION: "前置条件不满足: {detail}",
    ErrorType.NUMERIC_FAILURE: "数值积分失败: {detail}",
    ErrorType.QUADRATURE: "自适应求积未收敛: {detail}",
    ErrorType.CONFIG_ERROR: "配置错误（字段 {field}）: {detail}",
    ErrorType.UNKNOWN: "运行失败",
}

# 退出码：1 为性质违反/数值失败，2 为用法/配置错误
EXIT_CODES: Dict[ErrorType, int] = {
    ErrorType.INVALID_ARGUMENT: 2,
    ErrorType.CONFIG_ERROR: 2,
    ErrorType.BASIS_MISMATCH: 2,
    ErrorType.NOT_COMPLETELY_POSITIVE: 1,
    ErrorType.PRECONDITION: 1,
    ErrorType.NUMERIC_FAILURE: 1,
    ErrorType.QUADRATURE: 1,
    ErrorType.UNKNOWN: 1,
}


class ToolkitError(Exception):
    """工具包错误基类"""

    error_type: ErrorType = ErrorType.UNKNOWN

    def __init__(self, message: str, error_type: Optional[ErrorType] = None, **details: Any):
        super().__init__(message)
        if error_type is not None:
            self.error_type = error_type
        self.details = details


class RefinableError(ToolkitError):
    """可细化重试的错误"""

    error_type = ErrorType.NUMERIC_FAILURE


class NonRefinableError(ToolkitError):
    """不可细化重试的错误"""

    error_type = ErrorType.INVALID_ARGUMENT


class InvalidArgumentError(NonRefinableError, ValueError):
    error_type = ErrorType.INVALID_ARGUMENT


class BasisMismatchError(NonRefinableError, ValueError):
    error_type = ErrorType.BASIS_MISMATCH


class PreconditionError(NonRefinableError):
    error_type = ErrorType.PRECONDITION


class NotCompletelyPositiveError(NonRefinableError):
    """系数违反 CP 不等式，携带不等式名称和带符号 margin"""

    error_type = ErrorType.NOT_COMPLETELY_POSITIVE

    def __init__(self, inequality: str, margin: float):
        super().__init__(
            f"not completely positive: {inequality} violated (margin {margin:.6g})",
            inequality=inequality,
            margin=margin,
        )
        self.inequality = inequality
        self.margin = margin


class ConfigError(NonRefinableError):
    """配置错误，field 为出错的点分路径"""

    error_type = ErrorType.CONFIG_ERROR

    def __init__(self, field: str, detail: str):
        super().__init__(f"{field}: {detail}", field=field, detail=detail)
        self.field = field
        self.detail = detail


class NumericFailureError(RefinableError):
    """数值失败，diagnostics 保存最差的诊断量"""

    error_type = ErrorType.NUMERIC_FAILURE

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message, diagnostics=diagnostics or {})
        self.diagnostics = diagnostics or {}


class QuadratureError(RefinableError):
    error_type = ErrorType.QUADRATURE

    def __init__(self, message: str, estimate: float = float("nan"), error: float = float("nan")):
        super().__init__(message, estimate=estimate, error=error)
        self.estimate = estimate
        self.error = error


def get_friendly_error_message(error_type: ErrorType, **kwargs) -> str:
    """获取友好的错误提示消息

    Args:
        error_type: 错误类型
        **kwargs: 格式化参数（如 field、detail、margin）

    Returns:
        友好的错误提示消息
    """
    template = ERROR_MESSAGES.get(error_type, ERROR_MESSAGES[ErrorType.UNKNOWN])
    try:
        return template.format(**kwargs)
    except KeyError:
        return template


def describe_error(error: BaseException) -> str:
    """把异常渲染为一行可读提示"""
    if isinstance(error, ToolkitError):
        kwargs = {"detail": str(error)}
        kwargs.update(error.details)
        return get_friendly_error_message(error.error_type, **kwargs)
    return f"{get_friendly_error_message(ErrorType.UNKNOWN)}: {error}"


def exit_code_for(error: BaseException) -> int:
    """异常对应的进程退出码"""
    if isinstance(error, ToolkitError):
        return EXIT_CODES.get(error.error_type, 1)
    return 1


def is_refinable(error: BaseException) -> bool:
    return isinstance(error, ToolkitError) and error.error_type in REFINABLE_ERRORS


def retry_with_refinement(
    func: Callable[[Any], Any],
    levels: Sequence[Any],
    on_refine: Optional[Callable[[Any, Exception], None]] = None,
) -> Any:
    """按细化等级依次重试数值步骤

    Args:
        func: 接收细化等级的函数
        levels: 由粗到细的细化等级序列
        on_refine: 细化时的回调，参数为 (失败的等级, 异常)

    Returns:
        第一个成功等级的函数结果

    Raises:
        NonRefinableError 立即抛出；全部等级失败时抛出最后一个可细化错误
    """
    last_exception: Optional[Exception] = None

    for index, level in enumerate(levels):
        try:
            return func(level)
        except NonRefinableError:
            raise
        except RefinableError as e:
            last_exception = e
            if index < len(levels) - 1:
                if on_refine:
                    on_refine(level, e)
                logger.debug(f"[Refine] 等级 {level} 失败: {e}，切换到下一等级")
            else:
                logger.warning(f"[Refine] 所有细化等级均失败，最后错误: {e}")

    if last_exception:
        raise last_exception

    return None


def with_refinement(levels: Sequence[Any], keyword: str = "level"):
    """细化重试装饰器

    被装饰函数以关键字参数 keyword 接收当前细化等级。

    Args:
        levels: 细化等级序列
        keyword: 传递等级所用的关键字名

    Returns:
        装饰器函数
    """
    def decorator(func: Callable):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            if keyword in kwargs:
                return func(*args, **kwargs)

            def call(level):
                return func(*args, **{**kwargs, keyword: level})

            return retry_with_refinement(call, levels)
        return wrapper
    return decorator
