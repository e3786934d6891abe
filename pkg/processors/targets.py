#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
目标函数库
展开有限或解析已知的测试函数，端到端误差因此有精确参照
"""

import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List

import numpy as np

sys.path.append(str(Path(__file__).parent.parent))

from processors.sparse_grid import (
    LevelIndex,
    SparseExpansion,
    eval_truncation,
    hierarchize_separable,
)
from utils.error_handler import InvalidParameterError


@dataclass(frozen=True)
class TargetFunction:
    """
    测试目标

    Args:
        name: 名称
        function: 作用在形如 (..., D) 的点上的函数
        expansion: 层级预算 n 下的截断展开
        exact: 展开是否与函数本身完全相同
    """
    name: str
    function: Callable[[np.ndarray], np.ndarray]
    expansion: SparseExpansion
    exact: bool


def _offset_index(dimension: int) -> LevelIndex:
    """第一维取 l=2, i=3，其余维为 (1, 1)"""
    return LevelIndex((2,) + (1,) * (dimension - 1), (3,) + (1,) * (dimension - 1))


def _exact_target(name: str, expansion: SparseExpansion) -> TargetFunction:
    return TargetFunction(name, lambda x: eval_truncation(expansion, x), expansion, exact=True)


def _hat111(dimension: int, n: int) -> TargetFunction:
    return _exact_target("hat111", SparseExpansion.single(LevelIndex.ones(dimension), n))


def _hat_offset(dimension: int, n: int) -> TargetFunction:
    if n < 2:
        raise InvalidParameterError("hat-offset 需要 n ≥ 2")
    return _exact_target("hat-offset", SparseExpansion.single(_offset_index(dimension), n))


def _hat_pair(dimension: int, n: int) -> TargetFunction:
    if n < 2:
        raise InvalidParameterError("hat-pair 需要 n ≥ 2")
    terms = ((LevelIndex.ones(dimension), 1.0), (_offset_index(dimension), 0.5))
    return _exact_target("hat-pair", SparseExpansion(dimension, n, terms))


def _parabola(dimension: int, n: int) -> TargetFunction:
    """∏_j 4x_j(1 − x_j)，展开只是截断近似"""
    factor = lambda x: 4.0 * x * (1.0 - x)
    expansion = hierarchize_separable([factor] * dimension, dimension, n)
    function = lambda x: np.prod(4.0 * np.asarray(x) * (1.0 - np.asarray(x)), axis=-1)
    return TargetFunction("parabola", function, expansion, exact=False)


TARGETS: Dict[str, Callable[[int, int], TargetFunction]] = {
    "hat111": _hat111,
    "hat-offset": _hat_offset,
    "hat-pair": _hat_pair,
    "parabola": _parabola,
}


def available_targets() -> List[str]:
    return sorted(TARGETS)


def get_target(name: str, dimension: int, n: int) -> TargetFunction:
    """
    按名称构造目标函数

    Args:
        name: 目标名称
        dimension: 维数 D = d²
        n: 层级预算

    Returns:
        TargetFunction
    """
    if name not in TARGETS:
        raise InvalidParameterError(f"未知目标 {name}，可选: {', '.join(available_targets())}")
    return TARGETS[name](dimension, n)
