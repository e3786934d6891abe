#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
错误处理、配置与日志工具测试
"""

import logging
import sys
from pathlib import Path

import numpy as np
import pytest

# 添加项目路径
sys.path.append(str(Path(__file__).parent.parent))

from utils.error_handler import (
    EXIT_BOUND_VIOLATION,
    EXIT_USAGE,
    BoundViolationError,
    ErrorCategory,
    ErrorLevel,
    IndexRangeError,
    InvalidLevelError,
    NetworkFormatError,
    ShapeError,
    UnsupportedConstructionError,
    error_handler,
)
from utils.file_utils import load_config
from utils.logger import PROJECT_LOGGER, get_logger
from utils.performance import BatchEvaluator, resolve_max_threads
from utils.performance import logger as performance_logger


class TestErrorHandler:
    """错误处理测试类"""

    @pytest.mark.parametrize("exception, code", [
        (ShapeError("x"), "SHAPE_ERROR"),
        (IndexRangeError("x"), "INDEX_ERROR"),
        (InvalidLevelError("x"), "INVALID_LEVEL"),
        (UnsupportedConstructionError("x"), "UNSUPPORTED"),
        (NetworkFormatError("x"), "DATA_FORMAT_ERROR"),
        (BoundViolationError("x"), "BOUND_VIOLATION"),
        (FileNotFoundError("x"), "FILE_NOT_FOUND"),
        (RuntimeError("bad yaml"), "CONFIG_INVALID"),
    ])
    def test_classification(self, exception, code):
        """异常分类"""
        assert error_handler.handle_exception(exception).code == code

    def test_exit_codes(self):
        """理论界违反为 1，其余为 2"""
        assert error_handler.exit_code_for(BoundViolationError("x")) == EXIT_BOUND_VIOLATION
        assert error_handler.exit_code_for(ShapeError("x")) == EXIT_USAGE
        assert error_handler.exit_code_for(ZeroDivisionError()) == EXIT_USAGE

    def test_builtin_compatibility(self):
        """领域异常同时是对应的内置异常"""
        assert isinstance(ShapeError("x"), ValueError)
        assert isinstance(IndexRangeError("x"), IndexError)

    def test_message_contains_details(self):
        """格式化消息包含上下文与建议"""
        info = error_handler.handle_exception(InvalidLevelError("n=0"), "构造 sq")
        message = error_handler.format_error_message(info)
        assert "构造 sq: n=0" in message
        assert "建议解决方案" in message

    def test_registry_copy(self):
        """返回的是注册表条目的副本"""
        info = error_handler.handle_exception(ShapeError("a"))
        info.suggestions.append("extra")
        assert "extra" not in error_handler.error_registry["SHAPE_ERROR"].suggestions

    def test_error_report(self):
        """错误报告统计"""
        errors = [
            error_handler.handle_exception(BoundViolationError("a")),
            error_handler.handle_exception(ShapeError("b")),
        ]
        report = error_handler.create_error_report(errors)
        assert report["status"] == "error"
        assert report["critical_errors"] == 1
        assert report["error_categories"][ErrorCategory.VERIFICATION.value] == 1
        assert error_handler.create_error_report([]) == {"status": "success", "errors": []}
        assert errors[0].level == ErrorLevel.CRITICAL


class TestConfigAndLogging:
    """配置与日志测试类"""

    def test_missing_config_uses_defaults(self, tmp_path):
        """配置文件不存在时使用默认值"""
        config = load_config(str(tmp_path / "none.yaml"))
        assert config["verification"]["seed"] == 7
        assert config["logging"]["log_file"] is None

    def test_partial_config_merges(self, tmp_path):
        """只覆盖给出的键"""
        path = tmp_path / "config.yaml"
        path.write_text("verification:\n  samples: 12\n", encoding="utf-8")
        config = load_config(str(path))
        assert config["verification"]["samples"] == 12
        assert config["verification"]["seed"] == 7

    def test_thread_override(self, monkeypatch):
        """环境变量优先于配置"""
        monkeypatch.setenv("KOROBOV_CNN_THREADS", "3")
        assert resolve_max_threads({"performance": {"max_threads": 8}}) == 3
        monkeypatch.delenv("KOROBOV_CNN_THREADS")
        assert resolve_max_threads({"performance": {"max_threads": 8}}) == 8

    def test_invalid_thread_override_warns(self, monkeypatch, caplog):
        """无效的环境变量值被忽略并记录警告"""
        monkeypatch.setenv("KOROBOV_CNN_THREADS", "many")
        caplog.set_level(logging.WARNING, logger=performance_logger.name)
        performance_logger.addHandler(caplog.handler)
        try:
            assert resolve_max_threads({"performance": {"max_threads": 5}}) == 5
        finally:
            performance_logger.removeHandler(caplog.handler)
        assert "KOROBOV_CNN_THREADS='many'" in caplog.text

    def test_child_logger(self):
        """子日志器挂在项目根日志器下"""
        logger = get_logger("processors.demo")
        assert logger.name == f"{PROJECT_LOGGER}.processors.demo"
        assert logging.getLogger(PROJECT_LOGGER).handlers


class TestBatchEvaluator:
    """批量评估器测试类"""

    @pytest.mark.parametrize("threads, batch", [(1, 7), (4, 7), (4, 1000)])
    def test_order_preserved(self, threads, batch):
        """结果按原顺序拼接"""
        samples = np.arange(100.0).reshape(50, 2)
        result = BatchEvaluator(threads, batch).map(lambda x: x.sum(axis=1), samples)
        np.testing.assert_array_equal(result, samples.sum(axis=1))

    def test_empty(self):
        result = BatchEvaluator(2, 8).map(lambda x: x.sum(axis=1), np.zeros((0, 2)))
        assert result.shape == (0,)
