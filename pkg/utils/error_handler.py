#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
错误处理模块
定义构造与验证过程中的异常类型、友好错误信息以及命令行退出码映射
"""

import time
import traceback
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List

from .logger import LoggerMixin


# 命令行退出码
EXIT_OK = 0
EXIT_BOUND_VIOLATION = 1
EXIT_USAGE = 2


class KorobovError(Exception):
    """所有构造/验证错误的基类"""

    code = "KOROBOV_ERROR"

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context = context


class ShapeError(KorobovError, ValueError):
    """张量/网络形状不匹配(通道数、空间尺寸、核尺寸)"""

    code = "SHAPE_ERROR"


class IndexRangeError(KorobovError, IndexError):
    """通道、坐标或层级索引 (l, i) 越界"""

    code = "INDEX_ERROR"


class InvalidLevelError(KorobovError, ValueError):
    """逼近层级 n 无效"""

    code = "INVALID_LEVEL"


class InvalidParameterError(KorobovError, ValueError):
    """参数不满足前置条件"""

    code = "INVALID_PARAMETER"


class UnsupportedConstructionError(KorobovError):
    """请求的构造不在支持范围内"""

    code = "UNSUPPORTED"


class NetworkFormatError(KorobovError, ValueError):
    """网络文件格式不正确"""

    code = "DATA_FORMAT_ERROR"


class BoundViolationError(KorobovError):
    """实测误差或规模超出理论界"""

    code = "BOUND_VIOLATION"


class ErrorLevel(Enum):
    """错误级别"""
    INFO = "信息"
    WARNING = "警告"
    ERROR = "错误"
    CRITICAL = "严重错误"


class ErrorCategory(Enum):
    """错误类别"""
    CONSTRUCTION = "构造错误"
    PARAMETER = "参数错误"
    VERIFICATION = "验证错误"
    FILE = "文件错误"
    CONFIG = "配置错误"
    SYSTEM = "系统错误"


@dataclass
class ErrorInfo:
    """错误信息"""
    level: ErrorLevel
    category: ErrorCategory
    code: str
    message: str
    exit_code: int = EXIT_USAGE
    details: str = ""
    suggestions: List[str] = field(default_factory=list)
    technical_info: str = ""
    timestamp: float = 0.0

    def __post_init__(self):
        if self.timestamp == 0.0:
            self.timestamp = time.time()


class FriendlyErrorHandler(LoggerMixin):
    """友好错误处理器"""

    def __init__(self):
        self.error_registry = self._build_error_registry()

    def _build_error_registry(self) -> Dict[str, ErrorInfo]:
        """构建错误信息注册表"""
        return {
            "SHAPE_ERROR": ErrorInfo(
                level=ErrorLevel.ERROR,
                category=ErrorCategory.CONSTRUCTION,
                code="SHAPE_ERROR",
                message="张量或网络的形状不匹配",
                suggestions=[
                    "检查输入通道数是否等于网络第一层的输入通道数",
                    "确认所有层使用相同的空间尺寸 d 与核半宽 k",
                ]
            ),
            "INDEX_ERROR": ErrorInfo(
                level=ErrorLevel.ERROR,
                category=ErrorCategory.PARAMETER,
                code="INDEX_ERROR",
                message="索引越界",
                suggestions=[
                    "通道与坐标均从 1 开始计数",
                    "层级索引要求 i 为奇数且 1 ≤ i ≤ 2^l − 1",
                ]
            ),
            "INVALID_LEVEL": ErrorInfo(
                level=ErrorLevel.ERROR,
                category=ErrorCategory.PARAMETER,
                code="INVALID_LEVEL",
                message="逼近层级 n 无效",
                suggestions=["n 必须是不小于 1 的整数"]
            ),
            "INVALID_PARAMETER": ErrorInfo(
                level=ErrorLevel.ERROR,
                category=ErrorCategory.PARAMETER,
                code="INVALID_PARAMETER",
                message="参数不满足前置条件",
                suggestions=[
                    "使用 --help 查看各子命令的参数说明",
                    "检查 config.yaml 中的默认值",
                ]
            ),
            "UNSUPPORTED": ErrorInfo(
                level=ErrorLevel.ERROR,
                category=ErrorCategory.CONSTRUCTION,
                code="UNSUPPORTED",
                message="不支持的构造",
                suggestions=[
                    "乘积网络只支持 d 为 2 的幂",
                    "基网络与逼近器要求 d ≥ 3",
                    "加宽操作要求网络至少两层",
                ]
            ),
            "BOUND_VIOLATION": ErrorInfo(
                level=ErrorLevel.CRITICAL,
                category=ErrorCategory.VERIFICATION,
                code="BOUND_VIOLATION",
                message="实测值超出理论界",
                exit_code=EXIT_BOUND_VIOLATION,
                suggestions=[
                    "根据报告中的种子复现失败的输入",
                    "检查对应构造的核是否被改动",
                ]
            ),
            "FILE_NOT_FOUND": ErrorInfo(
                level=ErrorLevel.ERROR,
                category=ErrorCategory.FILE,
                code="FILE_NOT_FOUND",
                message="找不到指定的文件",
                suggestions=["请检查文件路径是否正确"]
            ),
            "FILE_WRITE_ERROR": ErrorInfo(
                level=ErrorLevel.ERROR,
                category=ErrorCategory.FILE,
                code="FILE_WRITE_ERROR",
                message="文件写入失败",
                suggestions=["检查输出目录是否存在且可写"]
            ),
            "DATA_FORMAT_ERROR": ErrorInfo(
                level=ErrorLevel.ERROR,
                category=ErrorCategory.FILE,
                code="DATA_FORMAT_ERROR",
                message="网络文件格式不正确",
                suggestions=[
                    "确认文件由 build 子命令生成",
                    "检查 schema_version 是否受支持",
                ]
            ),
            "CONFIG_INVALID": ErrorInfo(
                level=ErrorLevel.ERROR,
                category=ErrorCategory.CONFIG,
                code="CONFIG_INVALID",
                message="配置文件格式错误",
                suggestions=[
                    "检查YAML语法是否正确",
                    "参考 config.simple.yaml",
                ]
            ),
            "MEMORY_ERROR": ErrorInfo(
                level=ErrorLevel.CRITICAL,
                category=ErrorCategory.SYSTEM,
                code="MEMORY_ERROR",
                message="内存不足",
                suggestions=[
                    "减小 n 或 d",
                    "逼近器使用 expansion 索引模式",
                    "减小 performance.batch_size",
                ]
            ),
        }

    def handle_exception(
        self,
        exception: Exception,
        context: str = "",
        user_friendly: bool = True
    ) -> ErrorInfo:
        """
        处理异常并返回友好的错误信息

        Args:
            exception: 异常对象
            context: 上下文信息
            user_friendly: 为 False 时附带堆栈

        Returns:
            错误信息对象(注册表条目的副本)
        """
        error_code = self._classify_exception(exception)
        template = self.error_registry.get(error_code)

        if template is None:
            error_info = ErrorInfo(
                level=ErrorLevel.ERROR,
                category=ErrorCategory.SYSTEM,
                code="UNKNOWN_ERROR",
                message=f"未知错误: {type(exception).__name__}",
                suggestions=["使用 --log-level DEBUG 重新运行以获取详情"]
            )
        else:
            error_info = ErrorInfo(
                level=template.level,
                category=template.category,
                code=template.code,
                message=template.message,
                exit_code=template.exit_code,
                suggestions=list(template.suggestions)
            )

        error_info.details = str(exception)
        if context:
            error_info.details = f"{context}: {error_info.details}"

        if not user_friendly:
            error_info.technical_info = traceback.format_exc()

        return error_info

    def _classify_exception(self, exception: Exception) -> str:
        """
        根据异常类型分类错误

        Args:
            exception: 异常对象

        Returns:
            错误代码
        """
        if isinstance(exception, KorobovError):
            return exception.code
        if isinstance(exception, FileNotFoundError):
            return "FILE_NOT_FOUND"
        if isinstance(exception, (PermissionError, IsADirectoryError)):
            return "FILE_WRITE_ERROR"
        if isinstance(exception, MemoryError):
            return "MEMORY_ERROR"

        message = str(exception).lower()
        if "yaml" in message or "config" in message:
            return "CONFIG_INVALID"
        if "json" in message or "schema" in message:
            return "DATA_FORMAT_ERROR"
        return "UNKNOWN_ERROR"

    def exit_code_for(self, exception: Exception) -> int:
        """
        异常对应的命令行退出码

        Args:
            exception: 异常对象

        Returns:
            1 表示理论界被违反，其余均为 2(用法错误)
        """
        template = self.error_registry.get(self._classify_exception(exception))
        return template.exit_code if template else EXIT_USAGE

    def format_error_message(self, error_info: ErrorInfo, detailed: bool = False) -> str:
        """
        格式化错误消息

        Args:
            error_info: 错误信息
            detailed: 是否显示详细信息

        Returns:
            格式化的错误消息
        """
        level_prefix = {
            ErrorLevel.INFO: "[信息]",
            ErrorLevel.WARNING: "[警告]",
            ErrorLevel.ERROR: "[错误]",
            ErrorLevel.CRITICAL: "[严重]"
        }.get(error_info.level, "[错误]")

        lines = [f"{level_prefix} {error_info.message}"]

        # 违反的前置条件总是显示，方便用户定位
        if error_info.details:
            lines.append(f"详情: {error_info.details}")

        if error_info.suggestions:
            lines.append("建议解决方案:")
            for i, suggestion in enumerate(error_info.suggestions, 1):
                lines.append(f"  {i}. {suggestion}")

        if detailed and error_info.technical_info:
            lines.append(f"\n技术详情:\n{error_info.technical_info}")

        return "\n".join(lines)

    def print_error(self, error_info: ErrorInfo, detailed: bool = False):
        """
        记录并打印友好的错误信息

        Args:
            error_info: 错误信息
            detailed: 是否显示详细信息
        """
        message = self.format_error_message(error_info, detailed)

        if error_info.level == ErrorLevel.CRITICAL:
            self.logger.critical(message)
        elif error_info.level == ErrorLevel.ERROR:
            self.logger.error(message)
        elif error_info.level == ErrorLevel.WARNING:
            self.logger.warning(message)
        else:
            self.logger.info(message)

    def create_error_report(self, errors: List[ErrorInfo]) -> Dict[str, Any]:
        """
        创建错误报告

        Args:
            errors: 错误信息列表

        Returns:
            可序列化为 JSON 的错误报告
        """
        if not errors:
            return {"status": "success", "errors": []}

        error_counts: Dict[str, int] = {}
        for error in errors:
            category = error.category.value
            error_counts[category] = error_counts.get(category, 0) + 1

        critical_errors = [e for e in errors if e.level == ErrorLevel.CRITICAL]

        return {
            "status": "error" if critical_errors else "warning",
            "total_errors": len(errors),
            "critical_errors": len(critical_errors),
            "error_categories": error_counts,
            "errors": [
                {
                    "code": error.code,
                    "message": error.message,
                    "details": error.details,
                    "level": error.level.value,
                    "category": error.category.value,
                    "suggestions": error.suggestions,
                    "timestamp": error.timestamp
                }
                for error in errors
            ]
        }


# 全局错误处理器实例
error_handler = FriendlyErrorHandler()


def handle_error(
    exception: Exception,
    context: str = "",
    print_error: bool = True,
    detailed: bool = False
) -> ErrorInfo:
    """
    便捷的错误处理函数

    Args:
        exception: 异常对象
        context: 上下文信息
        print_error: 是否打印错误
        detailed: 是否显示详细信息

    Returns:
        错误信息对象
    """
    error_info = error_handler.handle_exception(exception, context, user_friendly=not detailed)

    if print_error:
        error_handler.print_error(error_info, detailed)

    return error_info

