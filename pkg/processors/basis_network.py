#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
基网络模块
Φ_{l,i} 把每个张量元素映到各自的一维帽函数值，g_{l,i} = Π̃_n ∘ Φ_{l,i} 逼近 φ_{l,i}(vect(X))
"""

import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

sys.path.append(str(Path(__file__).parent.parent))

from processors.cnn_builder import (
    ConvLayer,
    ConvNet,
    compose,
    compose_all,
    concatenate_all,
    deepen,
)
from processors.product_network import ProductNet, build_product_net, log2_exact, product_depth
from processors.scalar_networks import _check_level
from processors.shift_ops import selector_net
from processors.sparse_grid import LevelIndex
from processors.tensor_core import BiasVector, KernelBuilder
from utils.error_handler import ShapeError, UnsupportedConstructionError
from utils.logger import get_logger

logger = get_logger(__name__)


def phi_depth(d: int) -> int:
    """⌊5d/2⌋ + 3"""
    return (5 * d) // 2 + 3


def basis_depth(n: int, d: int) -> int:
    """2(2n+3)·log₂d + 5d"""
    return 2 * (2 * n + 3) * log2_exact(d) + 5 * d


def basis_error_bound(n: int, d: int) -> float:
    """(3/2)·2^{−2n}(d²−1)"""
    return 1.5 * 2.0 ** (-2 * n) * (d * d - 1)


@dataclass(frozen=True, eq=False)
class BasisNet:
    """
    基网络 g_{l,i}

    Args:
        li: 层级索引，维数 d²
        n: 层级
        d: 空间尺寸
        half_width: 核半宽
        phi_net: Φ_{l,i}(已加深)
        product: 乘积网络
        net: 完整网络
    """
    li: LevelIndex
    n: int
    d: int
    half_width: int
    phi_net: ConvNet
    product: ProductNet
    net: ConvNet


def build_phi_net(li: LevelIndex, d: int, k: int = 1) -> ConvNet:
    """
    构造 Φ_{l,i}

    第 j = (m−1)d+n 个元素对应 (l_j, i_j)：
    K¹ 产生 2d² 个斜坡通道 ±(x − x_{l_j,i_j})/h_{l_j}，
    K² 组装帽函数 σ(1 − σ(·) − σ(·))，
    d² 个选择网络各自只保留自己的元素，K³ 再把它们加回一个通道。

    Args:
        li: 层级索引
        d: 空间尺寸
        k: 核半宽

    Returns:
        宽 2d²、深 ⌊5d/2⌋+3 的网络
    """
    dimension = d * d
    if li.dimension != dimension:
        raise ShapeError(f"层级索引维数 {li.dimension} 与 d²={dimension} 不一致")

    ramps = KernelBuilder(2 * dimension, 1, k)
    ramp_bias = np.zeros(2 * dimension)
    hats = KernelBuilder(dimension, 2 * dimension, k)
    for j, (lj, ij) in enumerate(zip(li.l, li.i), 1):
        scale = 2.0 ** lj
        ramps.add(2 * j - 1, 1, 0, 0, scale)
        ramps.add(2 * j, 1, 0, 0, -scale)
        ramp_bias[2 * j - 2] = -float(ij)
        ramp_bias[2 * j - 1] = float(ij)
        hats.add(j, 2 * j - 1, 0, 0, -1.0)
        hats.add(j, 2 * j, 0, 0, -1.0)

    head = ConvNet(
        (
            ConvLayer(ramps.build(), BiasVector(ramp_bias)),
            ConvLayer(hats.build(), BiasVector(np.ones(dimension))),
        ),
        1, d, k,
    )

    selector_depth = phi_depth(d) - 3
    selectors = concatenate_all([
        selector_net(m, n, d, k, selector_depth)
        for m in range(1, d + 1)
        for n in range(1, d + 1)
    ])

    gather = KernelBuilder(1, dimension, k)
    for j in range(1, dimension + 1):
        gather.add(1, j, 0, 0, 1.0)
    tail = ConvNet((ConvLayer(gather.build(), BiasVector.zeros(1)),), dimension, d, k)

    net = compose_all([head, selectors, tail])
    logger.debug(f"构造 Φ 网络: d={d}, 深度 {net.depth}, 宽度 {net.width}")
    return net


def build_basis_net(li: LevelIndex, n: int, d: int, k: int = 1) -> BasisNet:
    """
    构造基网络 g_{l,i} = Π̃_n ∘ Φ_{l,i}

    Φ 阶段用恒等层加深，使总深度恰为 2(2n+3)log₂d + 5d。

    Args:
        li: 层级索引，维数 d²
        n: 层级
        d: 空间尺寸，d ≥ 3 且为 2 的幂
        k: 核半宽

    Returns:
        BasisNet
    """
    _check_level(n)
    if d < 3:
        raise UnsupportedConstructionError(f"基网络要求 d ≥ 3 (宽度 2d² ≥ 12)，实际 d={d}")
    product = build_product_net(n, d, k)

    phi = build_phi_net(li, d, k)
    target_depth = basis_depth(n, d) - product_depth(n, d)
    phi = deepen(phi, target_depth)
    net = compose(phi, product.net)
    return BasisNet(li=li, n=n, d=d, half_width=k, phi_net=phi, product=product, net=net)
