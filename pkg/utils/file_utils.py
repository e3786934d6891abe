#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
文件处理工具模块
提供配置加载、网络文件与报告的读写等通用功能
"""

import copy
import json
import math
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from .logger import LoggerMixin


# 内置默认配置，用户配置文件按段覆盖
DEFAULT_CONFIG: Dict[str, Any] = {
    'logging': {
        'level': 'INFO',
        'log_file': None,
        'max_file_size': '10MB',
        'backup_count': 5,
        'console_output': True,
    },
    'verification': {
        'samples': 500,
        'seed': 7,
        'equivalence_tolerance': 1e-9,
        'rate_factor': 3.0,
        'sampling': 'pairs',
    },
    'performance': {
        'max_threads': 4,
        'batch_size': 64,
    },
    'output': {
        'dense_kernel_limit': 4096,
    },
    'sweep': {
        'n_min': 1,
        'n_max': 6,
    },
}


class FileUtils(LoggerMixin):
    """文件处理工具类"""

    @staticmethod
    def ensure_dir(path: Union[str, Path]) -> Path:
        """
        确保目录存在，不存在则创建

        Args:
            path: 目录路径

        Returns:
            Path对象
        """
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        return path

    @staticmethod
    def read_text_file(file_path: Union[str, Path], encoding: str = 'utf-8') -> str:
        """
        读取文本文件

        Args:
            file_path: 文件路径
            encoding: 文件编码

        Returns:
            文件内容
        """
        with open(file_path, 'r', encoding=encoding) as f:
            return f.read()

    @staticmethod
    def write_text_file(
        file_path: Union[str, Path],
        content: str,
        encoding: str = 'utf-8',
        ensure_dir: bool = True
    ) -> None:
        """
        写入文本文件

        Args:
            file_path: 文件路径
            content: 文件内容
            encoding: 文件编码
            ensure_dir: 是否确保目录存在
        """
        file_path = Path(file_path)
        if ensure_dir:
            FileUtils.ensure_dir(file_path.parent)

        with open(file_path, 'w', encoding=encoding, newline='\n') as f:
            f.write(content)

    @staticmethod
    def load_yaml(file_path: Union[str, Path]) -> Dict[str, Any]:
        """
        加载YAML配置文件

        Args:
            file_path: YAML文件路径

        Returns:
            解析后的配置字典(空文件返回空字典)
        """
        try:
            with open(file_path, 'r', encoding='utf-8') as f:
                return yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ValueError(f"加载YAML配置失败 {file_path}: {e}")

    @staticmethod
    def save_json(
        data: Dict[str, Any],
        file_path: Union[str, Path],
        indent: Optional[int] = 2
    ) -> None:
        """
        保存数据到JSON文件

        Args:
            data: 要保存的数据
            file_path: JSON文件路径
            indent: 缩进空格数
        """
        FileUtils.ensure_dir(Path(file_path).parent)

        with open(file_path, 'w', encoding='utf-8') as f:
            json.dump(data, f, indent=indent, ensure_ascii=False)

    @staticmethod
    def format_file_size(size_bytes: int) -> str:
        """
        格式化文件大小显示

        Args:
            size_bytes: 字节数

        Returns:
            格式化的大小字符串
        """
        if size_bytes == 0:
            return "0B"

        size_names = ["B", "KB", "MB", "GB", "TB"]
        i = min(int(math.floor(math.log(size_bytes, 1024))), len(size_names) - 1)
        s = round(size_bytes / math.pow(1024, i), 2)
        return f"{s}{size_names[i]}"


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """按段递归合并配置"""
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(config_path: Optional[str] = "config.yaml") -> Dict[str, Any]:
    """
    加载配置文件的便捷函数

    文件不存在时直接使用内置默认配置。

    Args:
        config_path: 配置文件路径

    Returns:
        合并了默认值的配置字典
    """
    if config_path and Path(config_path).exists():
        return _deep_merge(DEFAULT_CONFIG, FileUtils.load_yaml(config_path))
    return copy.deepcopy(DEFAULT_CONFIG)
