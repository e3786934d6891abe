#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
日志工具模块
为构造、验证与扫描流程提供统一的日志配置
"""

import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

PROJECT_LOGGER = "korobov_cnn"


class ColoredFormatter(logging.Formatter):
    """带颜色的日志格式化器"""

    # ANSI颜色代码
    COLORS = {
        'DEBUG': '\033[36m',    # 青色
        'INFO': '\033[32m',     # 绿色
        'WARNING': '\033[33m',  # 黄色
        'ERROR': '\033[31m',    # 红色
        'CRITICAL': '\033[35m'  # 紫色
    }
    RESET = '\033[0m'

    def format(self, record):
        # 复制一份记录，避免文件处理器拿到带颜色的级别名
        record = logging.makeLogRecord(record.__dict__)
        if record.levelname in self.COLORS:
            record.levelname = f"{self.COLORS[record.levelname]}{record.levelname}{self.RESET}"
        return super().format(record)


def setup_logger(
    name: str = PROJECT_LOGGER,
    log_level: str = "INFO",
    log_file: Optional[str] = None,
    max_file_size: str = "10MB",
    backup_count: int = 5,
    console_output: bool = True
) -> logging.Logger:
    """
    设置日志记录器

    Args:
        name: 日志器名称，默认为项目根日志器
        log_level: 日志级别
        log_file: 日志文件路径
        max_file_size: 单个日志文件最大大小
        backup_count: 日志文件备份数量
        console_output: 是否输出到控制台(stderr，stdout 留给报告)

    Returns:
        配置好的日志器
    """
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, log_level.upper()))
    logger.handlers.clear()
    logger.propagate = False

    fmt = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    datefmt = '%Y-%m-%d %H:%M:%S'

    if console_output:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(logging.DEBUG)
        console_handler.setFormatter(ColoredFormatter(fmt=fmt, datefmt=datefmt))
        logger.addHandler(console_handler)

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = RotatingFileHandler(
            filename=log_file,
            maxBytes=_parse_size(max_file_size),
            backupCount=backup_count,
            encoding='utf-8'
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(fmt=fmt, datefmt=datefmt))
        logger.addHandler(file_handler)

    return logger


def setup_logger_from_config(config: dict, level_override: Optional[str] = None) -> logging.Logger:
    """
    按配置文件的 logging 段设置项目根日志器

    Args:
        config: 完整配置字典
        level_override: 命令行指定的日志级别

    Returns:
        项目根日志器
    """
    log_config = config.get('logging', {})
    return setup_logger(
        name=PROJECT_LOGGER,
        log_level=level_override or log_config.get('level', 'INFO'),
        log_file=log_config.get('log_file'),
        max_file_size=log_config.get('max_file_size', '10MB'),
        backup_count=log_config.get('backup_count', 5),
        console_output=log_config.get('console_output', True)
    )


def get_logger(name: str = PROJECT_LOGGER) -> logging.Logger:
    """
    获取项目日志器的子日志器

    子日志器不单独挂处理器，统一交给项目根日志器输出。

    Args:
        name: 日志器名称(自动挂到项目根日志器下)

    Returns:
        日志器实例
    """
    if name != PROJECT_LOGGER and not name.startswith(PROJECT_LOGGER + "."):
        name = f"{PROJECT_LOGGER}.{name}"

    root = logging.getLogger(PROJECT_LOGGER)
    if not root.handlers:
        setup_logger(PROJECT_LOGGER, log_level="WARNING")

    return logging.getLogger(name)


def _parse_size(size_str: str) -> int:
    """
    解析大小字符串为字节数

    Args:
        size_str: 大小字符串，如 "10MB", "1GB"

    Returns:
        字节数
    """
    size_str = str(size_str).upper().strip()

    if size_str.endswith('KB'):
        return int(float(size_str[:-2]) * 1024)
    elif size_str.endswith('MB'):
        return int(float(size_str[:-2]) * 1024 * 1024)
    elif size_str.endswith('GB'):
        return int(float(size_str[:-2]) * 1024 * 1024 * 1024)
    return int(size_str)


class LoggerMixin:
    """
    日志混入类，为构造器、验证器等提供 self.logger
    """

    @property
    def logger(self) -> logging.Logger:
        """获取当前类的日志器"""
        if not hasattr(self, '_logger'):
            self._logger = get_logger(self.__class__.__name__)
        return self._logger

