#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
平移算子模块
基本平移块 S^{s,t} 与单元素选择网络 Δ_{m,n}
"""

import math
import sys
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

sys.path.append(str(Path(__file__).parent.parent))

from processors.cnn_builder import ConvLayer, ConvNet, deepen, empty_net
from processors.tensor_core import BiasVector, ConvKernel, DataTensor, conv2d
from utils.error_handler import IndexRangeError, ShapeError


@dataclass(frozen=True)
class ShiftBlock:
    """
    基本块 S^{s,t}：在偏移 (s, t) 处为 1 的单通道卷积核

    与之卷积得到 [out]_{m,n} = [ι(X)]_{m+s,n+t}。
    """
    s: int
    t: int

    def kernel(self, k: int = 1) -> ConvKernel:
        if abs(self.s) > k or abs(self.t) > k:
            raise IndexRangeError(f"偏移 ({self.s}, {self.t}) 超出核半宽 {k}")
        return ConvKernel(1, 1, k, [0], [0], [self.s], [self.t], [1.0])

    def reflected_rows(self) -> "ShiftBlock":
        """行方向镜像 S^{s,t} → S^{−s,t}"""
        return ShiftBlock(-self.s, self.t)

    def __str__(self) -> str:
        return f"S^{{{self.s},{self.t}}}"


IDENTITY = ShiftBlock(0, 0)

# 每个 (m, n, d, k, depth) 一项，d = 8 时一个深度就有 64 项
SELECTOR_CACHE_SIZE = 1024


def shift_apply(block: ShiftBlock, X: DataTensor, k: Optional[int] = None) -> DataTensor:
    """
    用基本块平移单通道张量

    Args:
        block: 平移块
        X: 单通道张量
        k: 核半宽，缺省取能容纳该偏移的最小值

    Returns:
        平移后的张量，移出的位置由零填充补上
    """
    if X.channels != 1:
        raise ShapeError(f"平移只作用于单通道张量，实际 {X.channels} 通道")
    if k is None:
        k = max(1, abs(block.s), abs(block.t))
    return conv2d(block.kernel(k), X)


@dataclass(frozen=True)
class SelectorPlan:
    """
    选择序列 Δ_{m,n}：按顺序作用 blocks 后只保留 (m, n) 处的元素

    Args:
        m, n: 目标坐标(从 1 开始)
        d: 空间尺寸
        half_width: 核半宽
        blocks: 平移块序列，blocks[0] 最先作用
    """
    m: int
    n: int
    d: int
    half_width: int
    blocks: Tuple[ShiftBlock, ...]

    @property
    def length(self) -> int:
        return len(self.blocks)

    @property
    def max_length(self) -> int:
        """长度上界 ⌊5d/2⌋ − 1"""
        return max_selector_length(self.d)


def max_selector_length(d: int) -> int:
    return (5 * d) // 2 - 1


def _repeat(s: int, t: int, times: int) -> List[ShiftBlock]:
    return [ShiftBlock(s, t)] * times


def _upper_left_plan(m: int, n: int, d: int) -> List[ShiftBlock]:
    """m, n ≤ ⌈d/2⌉"""
    if m <= n:
        return (
            _repeat(1, 1, m - 1) + _repeat(0, 1, n - m) + _repeat(-1, -1, d - 1)
            + _repeat(1, 1, d - n) + _repeat(1, 0, n - m)
        )
    return (
        _repeat(1, 1, n - 1) + _repeat(1, 0, m - n) + _repeat(-1, -1, d - 1)
        + _repeat(1, 1, d - m) + _repeat(0, 1, m - n)
    )


def _upper_right_plan(m: int, n: int, d: int) -> List[ShiftBlock]:
    """m ≤ ⌈d/2⌉ < n"""
    if m + n <= d + 1:
        gap = d + 1 - m - n
        return (
            _repeat(1, -1, m - 1) + _repeat(0, -1, gap) + _repeat(-1, 1, d - 1)
            + _repeat(1, -1, n - 1) + _repeat(1, 0, gap)
        )
    excess = m + n - d - 1
    return (
        _repeat(1, -1, d - n) + _repeat(1, 0, excess) + _repeat(-1, 1, d - 1)
        + _repeat(1, -1, d - m) + _repeat(0, -1, excess)
    )


def build_selector(m: int, n: int, d: int, k: int = 1) -> SelectorPlan:
    """
    构造选择序列 Δ_{m,n}

    按 m、n 相对 ⌈d/2⌉ 的位置分四种情形；下半部分的两种情形
    由行镜像 m ↦ d+1−m (同时 S^{s,t} ↦ S^{−s,t}) 从上半部分得到。
    任何 k ≥ 1 都只使用单位偏移。

    Args:
        m, n: 目标坐标，取值 1..d
        d: 空间尺寸
        k: 核半宽

    Returns:
        SelectorPlan
    """
    if not (1 <= m <= d and 1 <= n <= d):
        raise IndexRangeError(f"目标坐标 ({m}, {n}) 超出 1..{d}")
    if k < 1:
        raise ShapeError(f"选择网络需要核半宽 k ≥ 1，实际 {k}")

    half = math.ceil(d / 2)
    if m <= half:
        blocks = _upper_left_plan(m, n, d) if n <= half else _upper_right_plan(m, n, d)
    else:
        mirrored = d + 1 - m
        base = _upper_left_plan(mirrored, n, d) if n <= half else _upper_right_plan(mirrored, n, d)
        blocks = [block.reflected_rows() for block in base]

    return SelectorPlan(m=m, n=n, d=d, half_width=k, blocks=tuple(blocks))


def apply_plan(plan: SelectorPlan, X: DataTensor) -> DataTensor:
    """依次作用选择序列中的平移(不经过 ReLU)"""
    for block in plan.blocks:
        X = shift_apply(block, X, plan.half_width)
    return X


def mask_oracle(X: DataTensor, m: int, n: int) -> DataTensor:
    """Δ_{m,n}(X) 的直接定义：保留 (m, n)，其余置零"""
    values = np.zeros_like(X.values)
    values[:, m - 1, n - 1] = X.values[:, m - 1, n - 1]
    return DataTensor(values)


@lru_cache(maxsize=SELECTOR_CACHE_SIZE)
def selector_net(m: int, n: int, d: int, k: int = 1, depth: Optional[int] = None) -> ConvNet:
    """
    选择序列对应的单通道网络，可选用恒等层补齐到 depth 层

    各层偏置为结构零；输入非负时 ReLU 不改变平移结果。
    """
    plan = build_selector(m, n, d, k)
    layers = tuple(ConvLayer(block.kernel(k), BiasVector.zeros(1)) for block in plan.blocks)
    net = ConvNet(layers, 1, d, k) if layers else empty_net(1, d, k)
    return deepen(net, depth) if depth is not None else net
