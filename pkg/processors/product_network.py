#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
乘积网络模块
12 通道网络 Π̃_n：先按列、再按行两两做 prd_n 归约，(d, d) 处输出 d² 个元素之积的近似
"""

import sys
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import List, Tuple

import numpy as np

sys.path.append(str(Path(__file__).parent.parent))

from processors.cnn_builder import ConvLayer, ConvNet, compose, compose_all
from processors.scalar_networks import (
    _check_level,
    averaging_layer,
    build_sq_net,
    combining_layer,
    prd_oracle,
)
from processors.tensor_core import BiasVector, DataTensor, KernelBuilder
from utils.error_handler import ShapeError, UnsupportedConstructionError
from utils.logger import get_logger

logger = get_logger(__name__)

# 相邻元素所在的偏移：列归约取左邻，行归约取上邻
COLUMN_AXIS = (0, -1)
ROW_AXIS = (-1, 0)

PRODUCT_CACHE_SIZE = 64


def log2_exact(d: int) -> int:
    """d = 2^p 时返回 p，否则报不支持"""
    if d < 2 or d & (d - 1):
        raise UnsupportedConstructionError(f"乘积网络只支持 d 为 2 的幂 (d ≥ 2)，实际 d={d}")
    return d.bit_length() - 1


@dataclass(frozen=True, eq=False)
class ProductNet:
    """
    乘积网络 Π̃_n = Π̃_n^r ∘ Π̃_n^c

    Args:
        n: 层级
        d: 空间尺寸(2 的幂)
        half_width: 核半宽
        column_stage: 列归约网络 Π̃_n^c
        row_stage: 行归约网络 Π̃_n^r
        net: 完整网络
    """
    n: int
    d: int
    half_width: int
    column_stage: ConvNet
    row_stage: ConvNet
    net: ConvNet

    @property
    def expected_depth(self) -> int:
        return product_depth(self.n, self.d)


def product_depth(n: int, d: int) -> int:
    """2(2n+3)·log₂d + 2(d−1)"""
    return 2 * (2 * n + 3) * log2_exact(d) + 2 * (d - 1)


def _single_layer(layer: ConvLayer, d: int, k: int) -> ConvNet:
    return ConvNet((layer,), layer.in_channels, d, k)


def _split_layer(previous: Tuple[int, int], k: int) -> ConvLayer:
    """K^1：1 → 2 通道 (S^prev; S^{0,0})"""
    s, t = previous
    builder = KernelBuilder(2, 1, k)
    builder.add(1, 1, s, t, 1.0)
    builder.add(2, 1, 0, 0, 1.0)
    return ConvLayer(builder.build(), BiasVector.zeros(2))


def _carry_layer(previous: Tuple[int, int], k: int) -> ConvLayer:
    """K^2：diag(S^prev, S^{0,0})，第一个通道继续平移"""
    s, t = previous
    builder = KernelBuilder(2, 2, k)
    builder.add(1, 1, s, t, 1.0)
    builder.add(2, 2, 0, 0, 1.0)
    return ConvLayer(builder.build(), BiasVector.zeros(2))


def _merge_layer(previous: Tuple[int, int], k: int) -> ConvLayer:
    """K^3：2 → 3 通道 ½[[S^prev, S^{0,0}], [S^prev, 0], [0, S^{0,0}]]"""
    s, t = previous
    builder = KernelBuilder(3, 2, k)
    builder.add(1, 1, s, t, 0.5).add(1, 2, 0, 0, 0.5)
    builder.add(2, 1, s, t, 0.5)
    builder.add(3, 2, 0, 0, 0.5)
    return ConvLayer(builder.build(), BiasVector.zeros(3))


def _reduction_step(q: int, n: int, d: int, k: int, previous: Tuple[int, int]) -> ConvNet:
    """
    第 q 步归约 Λ_q

    q = 1 时相邻元素距离为 1，直接用平均层；q ≥ 2 时距离为 2^{q−1}，
    先拆成两个通道，再把第一个通道平移 2^{q−1} − 1 次后合并。
    """
    sq_stage = build_sq_net(n, 3, d, k).net
    tail = _single_layer(combining_layer(k), d, k)
    if q == 1:
        return compose_all([_single_layer(averaging_layer(previous, k), d, k), sq_stage, tail])

    layers = [_split_layer(previous, k)]
    layers += [_carry_layer(previous, k)] * (2 ** (q - 1) - 2)
    layers.append(_merge_layer(previous, k))
    head = ConvNet(tuple(layers), 1, d, k)
    return compose_all([head, sq_stage, tail])


def _reduction_stage(n: int, d: int, k: int, previous: Tuple[int, int]) -> ConvNet:
    """Λ_p ∘ ... ∘ Λ_1"""
    p = log2_exact(d)
    return compose_all([_reduction_step(q, n, d, k, previous) for q in range(1, p + 1)])


@lru_cache(maxsize=PRODUCT_CACHE_SIZE)
def build_product_net(n: int, d: int, k: int = 1) -> ProductNet:
    """
    构造乘积网络 Π̃_n

    第 q 步之后，每行中第 j·2^q 列保存该行 2^q 个元素之积的近似；
    列归约完成后第 d 列保存整行之积，行归约把第 d 列再归约到 (d, d)。

    Args:
        n: 层级 n ≥ 1
        d: 空间尺寸 2^p
        k: 核半宽 k ≥ 1

    Returns:
        ProductNet
    """
    _check_level(n)
    log2_exact(d)
    if k < 1:
        raise ShapeError(f"乘积网络需要核半宽 k ≥ 1，实际 {k}")

    column_stage = _reduction_stage(n, d, k, COLUMN_AXIS)
    row_stage = _reduction_stage(n, d, k, ROW_AXIS)
    net = compose(column_stage, row_stage)
    logger.debug(f"构造乘积网络 Π̃_{n}: d={d}, 深度 {net.depth}, 宽度 {net.width}")
    return ProductNet(n=n, d=d, half_width=k, column_stage=column_stage, row_stage=row_stage, net=net)


def _pairwise_columns(n: int, matrix: np.ndarray) -> np.ndarray:
    return prd_oracle(n, matrix[..., 0::2], matrix[..., 1::2])


def column_reduction_oracle(n: int, X: DataTensor) -> np.ndarray:
    """
    列归约的数值解：每行两两相邻做 prd_n，直到只剩一列

    Returns:
        长度 d 的向量，第 m 个分量对应第 m 行
    """
    matrix = _single_channel(X)
    log2_exact(matrix.shape[-1])
    while matrix.shape[-1] > 1:
        matrix = _pairwise_columns(n, matrix)
    return matrix[:, 0]


def reduction_oracle(n: int, X: DataTensor) -> float:
    """
    先列后行的两两 prd_n 归约，不经过网络

    Args:
        n: 层级
        X: 单通道 d×d 张量，d = 2^p

    Returns:
        网络 (d, d) 处应当输出的值
    """
    column = column_reduction_oracle(n, X)
    while len(column) > 1:
        column = prd_oracle(n, column[0::2], column[1::2])
    return float(column[0])


def _single_channel(X: DataTensor) -> np.ndarray:
    if X.channels != 1:
        raise ShapeError(f"乘积归约只作用于单通道张量，实际 {X.channels} 通道")
    return X.values[0]


def product_error_bound(n: int, d: int) -> float:
    """3·2^{−2n−1}(d²−1)"""
    return 3.0 * 2.0 ** (-2 * n - 1) * (d * d - 1)
