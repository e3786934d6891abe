#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
网络构建模块
整网表示、宽度/深度/规模统计，以及加宽、加深、复合、拼接四种结构组合子
"""

import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

sys.path.append(str(Path(__file__).parent.parent))

from processors.tensor_core import (
    BiasVector,
    ConvKernel,
    DataTensor,
    KernelBuilder,
    conv2d_array,
)
from utils.error_handler import ShapeError, UnsupportedConstructionError
from utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class ConvLayer:
    """
    单层 (K^l, b^l)，作用为 σ(K∗h + b·1)

    Args:
        kernel: 卷积核
        bias: 偏置，长度等于 kernel 的输出通道数
    """
    kernel: ConvKernel
    bias: BiasVector

    def __post_init__(self):
        if len(self.bias) != self.kernel.out_channels:
            raise ShapeError(
                f"偏置长度 {len(self.bias)} 与卷积核输出通道数 {self.kernel.out_channels} 不一致"
            )

    @property
    def in_channels(self) -> int:
        return self.kernel.in_channels

    @property
    def out_channels(self) -> int:
        return self.kernel.out_channels

    @property
    def size(self) -> int:
        return self.kernel.nnz + self.bias.nnz

    def apply(self, array: np.ndarray) -> np.ndarray:
        """对 (..., c, d, d) 数组作用一层"""
        pre = conv2d_array(self.kernel, array)
        pre += self.bias.values[:, np.newaxis, np.newaxis]
        return np.maximum(pre, 0.0)


@dataclass(frozen=True, eq=False)
class ConvNet:
    """
    深度 ReLU 卷积网络 h^L

    Args:
        layers: 层序列
        input_channels: 输入通道数 c_0
        spatial: 空间尺寸 d
        half_width: 所有层共享的核半宽 k
    """
    layers: Tuple[ConvLayer, ...]
    input_channels: int
    spatial: int
    half_width: int

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, 'layers', layers)
        if self.input_channels < 1 or self.spatial < 1:
            raise ShapeError(f"输入通道数与空间尺寸必须为正: c0={self.input_channels}, d={self.spatial}")

        channels = self.input_channels
        for index, layer in enumerate(layers, 1):
            if layer.in_channels != channels:
                raise ShapeError(
                    f"第 {index} 层输入通道数 {layer.in_channels} 与上一层输出 {channels} 不一致"
                )
            if layer.kernel.half_width != self.half_width:
                raise ShapeError(
                    f"第 {index} 层核半宽 {layer.kernel.half_width} 与网络核半宽 {self.half_width} 不一致"
                )
            channels = layer.out_channels

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def channel_sizes(self) -> List[int]:
        """(c_0, c_1, ..., c_L)"""
        return [self.input_channels] + [layer.out_channels for layer in self.layers]

    @property
    def width(self) -> int:
        """W = max(c_1, ..., c_L)，空网络记为 c_0"""
        if not self.layers:
            return self.input_channels
        return max(layer.out_channels for layer in self.layers)

    @property
    def output_channels(self) -> int:
        return self.layers[-1].out_channels if self.layers else self.input_channels

    @property
    def size(self) -> int:
        return sum(layer.size for layer in self.layers)

    def forward_array(self, array: np.ndarray) -> np.ndarray:
        """
        对形如 (..., c_0, d, d) 的批量输入逐层作用

        Args:
            array: 输入数组

        Returns:
            形如 (..., c_L, d, d) 的输出
        """
        array = np.asarray(array, dtype=np.float64)
        self._check_input_shape(array.shape)
        for layer in self.layers:
            array = layer.apply(array)
        return array

    def trace_array(self, array: np.ndarray) -> List[np.ndarray]:
        """返回输入及每一层的激活值 [h^0, h^1, ..., h^L]"""
        array = np.asarray(array, dtype=np.float64)
        self._check_input_shape(array.shape)
        activations = [array]
        for layer in self.layers:
            activations.append(layer.apply(activations[-1]))
        return activations

    def _check_input_shape(self, shape: Tuple[int, ...]):
        if len(shape) < 3 or shape[-3:] != (self.input_channels, self.spatial, self.spatial):
            raise ShapeError(
                f"输入形状 {shape[-3:]} 与网络要求的 "
                f"({self.input_channels}, {self.spatial}, {self.spatial}) 不一致"
            )


@dataclass(frozen=True, eq=False)
class HypothesisFunction:
    """
    假设函数 h(X) = β + Σ_i α_i·[vect(h^L(X))]_i

    Args:
        net: 卷积网络
        alpha: 读出系数，长度 c_L·d²
        beta: 常数项
        alpha_support: α 的自由参数掩码，缺省为全部
        beta_free: β 是否计入规模
    """
    net: ConvNet
    alpha: np.ndarray
    beta: float = 0.0
    alpha_support: Optional[np.ndarray] = None
    beta_free: bool = True

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=np.float64, copy=True).ravel()
        expected = self.net.output_channels * self.net.spatial ** 2
        if len(alpha) != expected:
            raise ShapeError(f"α 长度 {len(alpha)} 与网络输出向量化长度 {expected} 不一致")
        if self.alpha_support is None:
            support = np.ones(len(alpha), dtype=bool)
        else:
            support = np.array(self.alpha_support, dtype=bool, copy=True).ravel()
        if support.shape != alpha.shape:
            raise ShapeError("α 支撑掩码长度不一致")
        if np.any(alpha[~support] != 0.0):
            raise ShapeError("结构零位置上的 α 必须为 0")
        if not self.beta_free and self.beta != 0.0:
            raise ShapeError("β 被标记为结构零时必须为 0")
        alpha.setflags(write=False)
        support.setflags(write=False)
        object.__setattr__(self, 'alpha', alpha)
        object.__setattr__(self, 'alpha_support', support)
        object.__setattr__(self, 'beta', float(self.beta))

    @property
    def readout_size(self) -> int:
        return int(self.alpha_support.sum()) + (1 if self.beta_free else 0)

    def evaluate_array(self, array: np.ndarray) -> np.ndarray:
        """批量求值，输入 (..., c_0, d, d)，输出 (...)"""
        features = self.net.forward_array(array)
        flat = features.reshape(features.shape[:-3] + (-1,))
        return self.beta + flat @ self.alpha


def forward(net: ConvNet, X: DataTensor) -> DataTensor:
    """
    h^L(X)：依次作用 σ∘A_{K^l,b^l}，l = 1..L

    Args:
        net: 卷积网络
        X: 输入张量

    Returns:
        输出张量(空网络原样返回)
    """
    if X.channels != net.input_channels or X.spatial != net.spatial:
        raise ShapeError(
            f"输入张量 ({X.channels}, {X.spatial}) 与网络 ({net.input_channels}, {net.spatial}) 不匹配"
        )
    if not net.layers:
        return X
    return DataTensor(net.forward_array(X.values))


def evaluate(h: HypothesisFunction, X: DataTensor) -> float:
    """β + Σ_i α_i·[vect(h^L(X))]_i"""
    if X.channels != h.net.input_channels or X.spatial != h.net.spatial:
        raise ShapeError(
            f"输入张量 ({X.channels}, {X.spatial}) 与网络 ({h.net.input_channels}, {h.net.spatial}) 不匹配"
        )
    return float(h.evaluate_array(X.values))


def size_of(obj: Union[ConvNet, HypothesisFunction]) -> int:
    """
    可能非零的参数个数

    卷积网络统计核与偏置的支撑集；假设函数另加 α 的支撑与 β。
    """
    if isinstance(obj, HypothesisFunction):
        return obj.net.size + obj.readout_size
    return obj.net.size if hasattr(obj, 'net') else obj.size


def empty_net(channels: int, spatial: int, half_width: int) -> ConvNet:
    """L = 0 的网络"""
    return ConvNet((), channels, spatial, half_width)


def identity_layer(channels: int, half_width: int) -> ConvLayer:
    """块对角 S^{0,0} 核、结构零偏置"""
    builder = KernelBuilder(channels, channels, half_width)
    for c in range(1, channels + 1):
        builder.add(c, c, 0, 0, 1.0)
    return ConvLayer(builder.build(), BiasVector.zeros(channels))


def widen(net: ConvNet, width: int) -> ConvNet:
    """
    把第一隐藏层补零到 width 个通道，输出不变

    第一层新增的输出通道与第二层对应的输入通道都是结构零块。

    Args:
        net: 至少两层的网络
        width: 目标宽度 W2 ≥ W

    Returns:
        加宽后的网络
    """
    if net.depth < 2:
        raise UnsupportedConstructionError(f"加宽要求网络至少两层，当前深度 {net.depth}")
    first, second = net.layers[0], net.layers[1]
    if width < net.width:
        raise ShapeError(f"目标宽度 {width} 小于网络当前宽度 {net.width}")
    if width == first.out_channels:
        return net

    extra = width - first.out_channels
    k1 = first.kernel
    widened_first = ConvLayer(
        k1.shifted_channels(0, 0, width, k1.in_channels),
        BiasVector(
            np.concatenate([first.bias.values, np.zeros(extra)]),
            np.concatenate([first.bias.support, np.zeros(extra, dtype=bool)]),
        ),
    )
    k2 = second.kernel
    widened_second = ConvLayer(k2.shifted_channels(0, 0, k2.out_channels, width), second.bias)

    logger.debug(f"加宽网络: 第一隐藏层 {first.out_channels} → {width} 通道")
    return ConvNet(
        (widened_first, widened_second) + net.layers[2:],
        net.input_channels, net.spatial, net.half_width,
    )


def deepen(net: ConvNet, depth: int) -> ConvNet:
    """
    在末尾追加恒等层直到深度为 depth

    恒等层 σ(h) = h 只在 h ≥ 0 时成立；隐藏层激活经过 ReLU 恒非负，
    空网络加深则要求输入本身非负。

    Args:
        net: 网络
        depth: 目标深度 L2 ≥ L

    Returns:
        加深后的网络
    """
    if depth < net.depth:
        raise UnsupportedConstructionError(f"目标深度 {depth} 小于当前深度 {net.depth}")
    if depth == net.depth:
        return net
    if net.depth == 0:
        logger.warning("对空网络加深: 仅对非负输入保持输出不变")

    layer = identity_layer(net.output_channels, net.half_width)
    return ConvNet(
        net.layers + (layer,) * (depth - net.depth),
        net.input_channels, net.spatial, net.half_width,
    )


def compose(f: ConvNet, g: ConvNet) -> ConvNet:
    """
    复合 g∘f：先 f 后 g

    Args:
        f: 内层网络
        g: 外层网络，输入通道数等于 f 的输出通道数

    Returns:
        层序列相接的网络
    """
    if f.spatial != g.spatial:
        raise ShapeError(f"空间尺寸不一致: {f.spatial} 与 {g.spatial}")
    if g.input_channels != f.output_channels:
        raise ShapeError(f"外层输入通道数 {g.input_channels} 与内层输出通道数 {f.output_channels} 不一致")
    if not g.layers:
        return f
    if not f.layers:
        return g
    if f.half_width != g.half_width:
        raise ShapeError(f"核半宽不一致: {f.half_width} 与 {g.half_width}")
    return ConvNet(f.layers + g.layers, f.input_channels, f.spatial, f.half_width)


def compose_all(nets: Sequence[ConvNet]) -> ConvNet:
    """按顺序复合，nets[0] 最先作用"""
    if not nets:
        raise ShapeError("复合序列为空")
    result = nets[0]
    for net in nets[1:]:
        result = compose(result, net)
    return result


def concatenate(f: ConvNet, g: ConvNet) -> ConvNet:
    """
    拼接 f⊕g：块对角核、堆叠偏置，(X; Y) ↦ (f(X); g(Y))

    Args:
        f: 第一个网络
        g: 第二个网络，深度、d、k 与 f 相同

    Returns:
        拼接后的网络
    """
    return concatenate_all([f, g])


def concatenate_all(nets: Sequence[ConvNet]) -> ConvNet:
    """
    多个等深网络的块对角拼接

    Args:
        nets: 网络序列

    Returns:
        拼接后的网络，通道按 nets 的顺序排列
    """
    if not nets:
        raise ShapeError("拼接序列为空")
    head = nets[0]
    for net in nets[1:]:
        if net.depth != head.depth:
            raise UnsupportedConstructionError(
                f"拼接要求深度相同({head.depth} 与 {net.depth})，请先调用 deepen"
            )
        if net.spatial != head.spatial or net.half_width != head.half_width:
            raise ShapeError("拼接要求空间尺寸与核半宽相同")
    if len(nets) == 1:
        return head

    in_total = sum(net.input_channels for net in nets)
    layers = []
    for index in range(head.depth):
        stage = [net.layers[index] for net in nets]
        out_total = sum(layer.out_channels for layer in stage)
        parts = {name: [] for name in ('p', 'q', 's', 't', 'values')}
        out_offset = in_offset = 0
        for layer in stage:
            kernel = layer.kernel
            parts['p'].append(kernel.p + out_offset)
            parts['q'].append(kernel.q + in_offset)
            parts['s'].append(kernel.s)
            parts['t'].append(kernel.t)
            parts['values'].append(kernel.values)
            out_offset += layer.out_channels
            in_offset += layer.in_channels
        kernel = ConvKernel(
            out_total, in_offset, head.half_width,
            *(np.concatenate(parts[name]) for name in ('p', 'q', 's', 't', 'values')),
        )
        bias = BiasVector(
            np.concatenate([layer.bias.values for layer in stage]),
            np.concatenate([layer.bias.support for layer in stage]),
        )
        layers.append(ConvLayer(kernel, bias))

    return ConvNet(tuple(layers), in_total, head.spatial, head.half_width)
