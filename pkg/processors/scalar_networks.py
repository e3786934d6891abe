#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
标量网络模块
锯齿迭代 g_m、平方网络 sq_n 与乘积单元 prd_n，各自给出显式卷积网络与闭式数值解
"""

import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

sys.path.append(str(Path(__file__).parent.parent))

from processors.cnn_builder import ConvLayer, ConvNet, compose_all
from processors.tensor_core import BiasVector, KernelBuilder
from utils.error_handler import InvalidLevelError
from utils.logger import get_logger

logger = get_logger(__name__)


def _check_level(n: int):
    if int(n) != n or n < 1:
        raise InvalidLevelError(f"层级 n 必须是正整数，实际 {n}")


def hat_g(x):
    """
    帽函数 g(x) = 2σ(x) − 4σ(x−1/2) + 2σ(x−1)

    区间 [0,1] 外按 ReLU 公式直接求值，不做截断。
    """
    x = np.asarray(x, dtype=np.float64)
    return 2.0 * np.maximum(x, 0.0) - 4.0 * np.maximum(x - 0.5, 0.0) + 2.0 * np.maximum(x - 1.0, 0.0)


def g_iterate(m: int, x):
    """g 的 m 重复合 g_m，g_0 为恒等"""
    result = np.asarray(x, dtype=np.float64)
    for _ in range(m):
        result = hat_g(result)
    return result


def sq_oracle(n: int, x):
    """
    sq_n(x)：x² 在断点 l/2^n 上的分段线性插值

    在区间 [i/2^n, (i+1)/2^n] 上 sq_n(x) = 2^{−n}((2i+1)x − i(i+1)2^{−n})。

    Args:
        n: 层级
        x: [0,1] 中的标量或数组

    Returns:
        与 x 同形的插值结果
    """
    _check_level(n)
    x = np.asarray(x, dtype=np.float64)
    scale = 2.0 ** n
    i = np.clip(np.floor(x * scale), 0, scale - 1)
    return ((2.0 * i + 1.0) * x - i * (i + 1.0) / scale) / scale


def sq_series(n: int, x):
    """sq_n 的第二种写法 x − Σ_{m=1}^{n} 4^{−m} g_m(x)，用于交叉校验"""
    _check_level(n)
    x = np.asarray(x, dtype=np.float64)
    result = x.copy()
    g = x
    for m in range(1, n + 1):
        g = hat_g(g)
        result = result - g / 4.0 ** m
    return result


def prd_oracle(n: int, x, y):
    """prd_n(x, y) = 2(sq_n((x+y)/2) − sq_n(x/2) − sq_n(y/2))"""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return 2.0 * (sq_oracle(n, (x + y) / 2.0) - sq_oracle(n, x / 2.0) - sq_oracle(n, y / 2.0))


@dataclass(frozen=True, eq=False)
class SqNet:
    """
    逐通道作用 sq_n 的网络

    Args:
        n: 层级
        channels: 作用的通道数 c
        net: 宽 4c、深 2(n+1) 的网络
    """
    n: int
    channels: int
    net: ConvNet


def build_sq_net(n: int, c: int, d: int, k: int) -> SqNet:
    """
    构造 sq_n 网络

    通道布局：前 c 个通道存 sq 的部分和，后 c 个通道存锯齿 g_m。
    每一步用 K^{m,1} 展开成 4c 个通道 (sq, σ(g), σ(g−1/2), σ(g−1))，
    再用 K^{m,2} 合回 2c 个通道，最后投影到前 c 个通道。

    Args:
        n: 层级 n ≥ 1
        c: 通道数
        d: 空间尺寸
        k: 核半宽

    Returns:
        SqNet
    """
    _check_level(n)
    layers = []

    # K^0：复制每个通道
    duplicate = KernelBuilder(2 * c, c, k)
    for r in range(1, c + 1):
        duplicate.add(r, r, 0, 0, 1.0)
        duplicate.add(c + r, r, 0, 0, 1.0)
    layers.append(ConvLayer(duplicate.build(), BiasVector.zeros(2 * c)))

    for m in range(1, n + 1):
        expand = KernelBuilder(4 * c, 2 * c, k)
        for r in range(1, c + 1):
            expand.add(r, r, 0, 0, 1.0)
            for block in (1, 2, 3):
                expand.add(block * c + r, c + r, 0, 0, 1.0)
        expand_bias = np.concatenate([np.zeros(2 * c), np.full(c, -0.5), np.full(c, -1.0)])
        layers.append(ConvLayer(expand.build(), BiasVector.structural(expand_bias)))

        merge = KernelBuilder(2 * c, 4 * c, k)
        for r in range(1, c + 1):
            merge.add(r, r, 0, 0, 1.0)
            merge.add(r, c + r, 0, 0, -1.0 / 2.0 ** (2 * m - 1))
            merge.add(r, 2 * c + r, 0, 0, 1.0 / 2.0 ** (2 * m - 2))
            merge.add(r, 3 * c + r, 0, 0, -1.0 / 2.0 ** (2 * m - 1))
            merge.add(c + r, c + r, 0, 0, 2.0)
            merge.add(c + r, 2 * c + r, 0, 0, -4.0)
            merge.add(c + r, 3 * c + r, 0, 0, 2.0)
        layers.append(ConvLayer(merge.build(), BiasVector.zeros(2 * c)))

    # K^n：投影到 sq 通道
    project = KernelBuilder(c, 2 * c, k)
    for r in range(1, c + 1):
        project.add(r, r, 0, 0, 1.0)
    layers.append(ConvLayer(project.build(), BiasVector.zeros(c)))

    net = ConvNet(tuple(layers), c, d, k)
    logger.debug(f"构造 sq_{n} 网络: c={c}, 深度 {net.depth}, 宽度 {net.width}")
    return SqNet(n=n, channels=c, net=net)


def averaging_layer(previous: tuple, k: int) -> ConvLayer:
    """
    1 → 3 通道：((S^prev + S^{0,0})/2, S^prev/2, S^{0,0}/2)

    previous 为相邻元素所在的偏移 (s, t)。
    """
    s, t = previous
    builder = KernelBuilder(3, 1, k)
    builder.add(1, 1, s, t, 0.5).add(1, 1, 0, 0, 0.5)
    builder.add(2, 1, s, t, 0.5)
    builder.add(3, 1, 0, 0, 0.5)
    return ConvLayer(builder.build(), BiasVector.zeros(3))


def combining_layer(k: int) -> ConvLayer:
    """3 → 1 通道：2(S, −S, −S)"""
    builder = KernelBuilder(1, 3, k)
    builder.add(1, 1, 0, 0, 2.0).add(1, 2, 0, 0, -2.0).add(1, 3, 0, 0, -2.0)
    return ConvLayer(builder.build(), BiasVector.zeros(1))


def build_prd_net(n: int, d: int, k: int) -> ConvNet:
    """
    独立的乘积单元网络：2 通道输入 (x; y) → 1 通道 prd_n(x, y)

    结构为 平均层 → 3 通道 sq_n → 组合层，宽 12、深 2(n+1)+2。

    Args:
        n: 层级
        d: 空间尺寸
        k: 核半宽

    Returns:
        卷积网络
    """
    _check_level(n)
    average = KernelBuilder(3, 2, k)
    average.add(1, 1, 0, 0, 0.5).add(1, 2, 0, 0, 0.5)
    average.add(2, 1, 0, 0, 0.5)
    average.add(3, 2, 0, 0, 0.5)
    head = ConvNet((ConvLayer(average.build(), BiasVector.zeros(3)),), 2, d, k)
    tail = ConvNet((combining_layer(k),), 3, d, k)
    net = compose_all([head, build_sq_net(n, 3, d, k).net, tail])
    logger.debug(f"构造 prd_{n} 网络: 深度 {net.depth}, 宽度 {net.width}")
    return net
