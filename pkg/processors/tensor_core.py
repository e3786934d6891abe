#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
张量核心模块
数据张量、零填充多通道卷积、ReLU 与向量化的精确语义(对外索引从 1 开始)
"""

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

sys.path.append(str(Path(__file__).parent.parent))

from utils.error_handler import IndexRangeError, ShapeError


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class DataTensor:
    """
    c × d × d 数据张量

    Args:
        values: 形如 (c, d, d) 的实数组，构造时复制并设为只读
    """
    values: np.ndarray

    def __post_init__(self):
        array = _frozen_array(self.values)
        if array.ndim != 3:
            raise ShapeError(f"数据张量必须是三维 (c, d, d)，实际维数 {array.ndim}")
        c, rows, cols = array.shape
        if c < 1 or rows < 1 or cols < 1:
            raise ShapeError(f"数据张量各维必须为正，实际形状 {array.shape}")
        if rows != cols:
            raise ShapeError(f"只支持方形空间区域，实际 {rows}×{cols}")
        object.__setattr__(self, 'values', array)

    @property
    def channels(self) -> int:
        return self.values.shape[0]

    @property
    def spatial(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_matrix(cls, matrix) -> "DataTensor":
        """单通道张量"""
        return cls(np.asarray(matrix, dtype=np.float64)[np.newaxis, :, :])

    @classmethod
    def zeros(cls, channels: int, spatial: int) -> "DataTensor":
        return cls(np.zeros((channels, spatial, spatial)))

    def channel(self, q: int) -> np.ndarray:
        """第 q 个通道(从 1 开始)"""
        _check_channel(q, self.channels)
        return self.values[q - 1]

    def entry(self, q: int, m: int, n: int) -> float:
        """[X]_{q,m,n}，坐标必须在 1..d 内"""
        _check_channel(q, self.channels)
        if not (1 <= m <= self.spatial and 1 <= n <= self.spatial):
            raise IndexRangeError(f"坐标 ({m}, {n}) 超出 1..{self.spatial}")
        return float(self.values[q - 1, m - 1, n - 1])

    def __add__(self, other: "DataTensor") -> "DataTensor":
        if self.values.shape != other.values.shape:
            raise ShapeError(f"形状不一致: {self.values.shape} 与 {other.values.shape}")
        return DataTensor(self.values + other.values)

    def scaled(self, alpha: float) -> "DataTensor":
        return DataTensor(alpha * self.values)


def _check_channel(q: int, channels: int):
    if not 1 <= q <= channels:
        raise IndexRangeError(f"通道索引 {q} 超出 1..{channels}")


@dataclass(frozen=True, eq=False)
class ConvKernel:
    """
    稀疏存储的卷积核 K ∈ R^{c′×c×(2k+1)×(2k+1)}

    只保存"可能非零"的条目(支撑集)，支撑集之外的条目是结构零，
    不计入网络规模。支撑集按 (q, s, t, p) 排序，卷积按此顺序累加。

    Args:
        out_channels: 输出通道数 c′
        in_channels: 输入通道数 c
        half_width: 核半宽 k
        p, q: 输出/输入通道(内部从 0 开始)
        s, t: 空间偏移，取值 −k..k
        values: 条目值
    """
    out_channels: int
    in_channels: int
    half_width: int
    p: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    q: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    s: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    t: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if self.out_channels < 1 or self.in_channels < 1:
            raise ShapeError(f"卷积核通道数必须为正: {self.out_channels}×{self.in_channels}")
        if self.half_width < 0:
            raise ShapeError(f"核半宽必须非负: {self.half_width}")

        p = np.asarray(self.p, dtype=np.int64).ravel()
        q = np.asarray(self.q, dtype=np.int64).ravel()
        s = np.asarray(self.s, dtype=np.int64).ravel()
        t = np.asarray(self.t, dtype=np.int64).ravel()
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if not (len(p) == len(q) == len(s) == len(t) == len(values)):
            raise ShapeError("卷积核支撑数组长度不一致")

        k = self.half_width
        if len(p) and (
            p.min() < 0 or p.max() >= self.out_channels
            or q.min() < 0 or q.max() >= self.in_channels
        ):
            raise IndexRangeError("卷积核条目的通道索引越界")
        if len(s) and (np.abs(s).max() > k or np.abs(t).max() > k):
            raise IndexRangeError(f"卷积核条目的空间偏移超出 ±{k}")

        order = np.lexsort((p, t, s, q))
        p, q, s, t, values = p[order], q[order], s[order], t[order], values[order]
        if len(p) > 1:
            keys = np.stack([q, s, t, p], axis=1)
            if np.any(np.all(keys[1:] == keys[:-1], axis=1)):
                raise ShapeError("卷积核支撑集中存在重复条目")

        for name, array in (('p', p), ('q', q), ('s', s), ('t', t), ('values', values)):
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def spatial_size(self) -> int:
        return 2 * self.half_width + 1

    @property
    def nnz(self) -> int:
        """支撑集大小(可能非零的参数个数)"""
        return len(self.values)

    @classmethod
    def from_entries(
        cls,
        out_channels: int,
        in_channels: int,
        half_width: int,
        entries: Iterable[Tuple[int, int, int, int, float]]
    ) -> "ConvKernel":
        """
        由 (p, q, s, t, value) 条目构造，p、q 从 1 开始

        Args:
            out_channels: 输出通道数
            in_channels: 输入通道数
            half_width: 核半宽
            entries: 条目序列

        Returns:
            卷积核
        """
        builder = KernelBuilder(out_channels, in_channels, half_width)
        for p, q, s, t, value in entries:
            builder.add(p, q, s, t, value)
        return builder.build()

    @classmethod
    def from_dense(cls, dense) -> "ConvKernel":
        """
        由稠密数组 [p][q][row][col] 构造，所有条目都视为自由参数

        Args:
            dense: 形如 (c′, c, 2k+1, 2k+1) 的数组
        """
        dense = np.asarray(dense, dtype=np.float64)
        if dense.ndim != 4 or dense.shape[2] != dense.shape[3] or dense.shape[2] % 2 == 0:
            raise ShapeError(f"稠密卷积核形状无效: {dense.shape}")
        k = dense.shape[2] // 2
        p, q, row, col = np.indices(dense.shape).reshape(4, -1)
        return cls(
            out_channels=dense.shape[0],
            in_channels=dense.shape[1],
            half_width=k,
            p=p, q=q, s=row - k, t=col - k,
            values=dense.reshape(-1),
        )

    def to_dense(self) -> np.ndarray:
        """稠密数组 [p][q][s+k][t+k]"""
        k = self.half_width
        dense = np.zeros((self.out_channels, self.in_channels, 2 * k + 1, 2 * k + 1))
        dense[self.p, self.q, self.s + k, self.t + k] = self.values
        return dense

    def support_mask(self) -> np.ndarray:
        """与 to_dense 同形的支撑集掩码"""
        k = self.half_width
        mask = np.zeros((self.out_channels, self.in_channels, 2 * k + 1, 2 * k + 1), dtype=bool)
        mask[self.p, self.q, self.s + k, self.t + k] = True
        return mask

    def entry(self, p: int, q: int, s: int, t: int) -> float:
        """[K]_{p,q,s,t}，p、q 从 1 开始"""
        _check_channel(p, self.out_channels)
        _check_channel(q, self.in_channels)
        k = self.half_width
        if abs(s) > k or abs(t) > k:
            raise IndexRangeError(f"空间偏移 ({s}, {t}) 超出 ±{k}")
        hit = (self.p == p - 1) & (self.q == q - 1) & (self.s == s) & (self.t == t)
        return float(self.values[hit].sum()) if hit.any() else 0.0

    def scaled(self, alpha: float) -> "ConvKernel":
        """α·K，支撑集不变"""
        return ConvKernel(
            self.out_channels, self.in_channels, self.half_width,
            self.p, self.q, self.s, self.t, alpha * self.values,
        )

    def shifted_channels(self, out_offset: int, in_offset: int, out_channels: int, in_channels: int) -> "ConvKernel":
        """把全部条目平移到更大的通道块中(块对角拼接用)"""
        return ConvKernel(
            out_channels, in_channels, self.half_width,
            self.p + out_offset, self.q + in_offset, self.s, self.t, self.values,
        )


class KernelBuilder:
    """
    逐条目组装卷积核，同一位置多次 add 会累加

    Args:
        out_channels: 输出通道数
        in_channels: 输入通道数
        half_width: 核半宽 k
    """

    def __init__(self, out_channels: int, in_channels: int, half_width: int):
        self.out_channels = out_channels
        self.in_channels = in_channels
        self.half_width = half_width
        self._entries: Dict[Tuple[int, int, int, int], float] = {}

    def add(self, p: int, q: int, s: int, t: int, value: float) -> "KernelBuilder":
        """在 (p, q, s, t) 处加上 value，p、q 从 1 开始"""
        _check_channel(p, self.out_channels)
        _check_channel(q, self.in_channels)
        if abs(s) > self.half_width or abs(t) > self.half_width:
            raise IndexRangeError(f"空间偏移 ({s}, {t}) 超出 ±{self.half_width}")
        key = (p - 1, q - 1, s, t)
        self._entries[key] = self._entries.get(key, 0.0) + float(value)
        return self

    def build(self) -> ConvKernel:
        if self._entries:
            keys = np.array(list(self._entries.keys()), dtype=np.int64)
            values = np.array(list(self._entries.values()), dtype=np.float64)
        else:
            keys = np.zeros((0, 4), dtype=np.int64)
            values = np.zeros(0)
        return ConvKernel(
            self.out_channels, self.in_channels, self.half_width,
            keys[:, 0], keys[:, 1], keys[:, 2], keys[:, 3], values,
        )


@dataclass(frozen=True, eq=False)
class BiasVector:
    """
    偏置向量，support 标记可能非零的条目

    Args:
        values: 偏置值
        support: 自由参数掩码，缺省时全部视为自由参数
    """
    values: np.ndarray
    support: Optional[np.ndarray] = None

    def __post_init__(self):
        values = _frozen_array(np.atleast_1d(self.values))
        if values.ndim != 1 or len(values) < 1:
            raise ShapeError(f"偏置必须是非空一维向量，实际形状 {values.shape}")
        if self.support is None:
            support = np.ones(len(values), dtype=bool)
        else:
            support = np.array(self.support, dtype=bool, copy=True)
        if support.shape != values.shape:
            raise ShapeError("偏置支撑掩码与偏置长度不一致")
        if np.any(values[~support] != 0.0):
            raise ShapeError("结构零位置上的偏置必须为 0")
        support.setflags(write=False)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'support', support)

    def __len__(self) -> int:
        return len(self.values)

    @classmethod
    def zeros(cls, length: int) -> "BiasVector":
        """全部为结构零的偏置"""
        return cls(np.zeros(length), np.zeros(length, dtype=bool))

    @classmethod
    def structural(cls, values) -> "BiasVector":
        """构造用偏置：只有非零条目是自由参数"""
        values = np.asarray(values, dtype=np.float64)
        return cls(values, values != 0.0)

    @property
    def nnz(self) -> int:
        return int(self.support.sum())


def zero_pad_lookup(X: DataTensor, q: int, m: int, n: int) -> float:
    """
    零填充取值 [ι(X)]_{q,m,n}

    Args:
        X: 数据张量
        q: 通道(1..c)
        m, n: 任意整数坐标

    Returns:
        坐标在 1..d 内时返回 [X]_{q,m,n}，否则为 0
    """
    _check_channel(q, X.channels)
    d = X.spatial
    if 1 <= m <= d and 1 <= n <= d:
        return float(X.values[q - 1, m - 1, n - 1])
    return 0.0


def conv2d_array(kernel: ConvKernel, array: np.ndarray) -> np.ndarray:
    """
    对形如 (..., c, d, d) 的批量数组做零填充卷积

    每个输出条目按支撑集顺序 (q, s, t) 逐项累加。

    Args:
        kernel: 卷积核
        array: 输入数组，倒数第三维为通道

    Returns:
        形如 (..., c′, d, d) 的数组
    """
    if array.shape[-3] != kernel.in_channels:
        raise ShapeError(
            f"输入通道数 {array.shape[-3]} 与卷积核输入通道数 {kernel.in_channels} 不一致"
        )
    k = kernel.half_width
    d = array.shape[-1]
    batch_shape = array.shape[:-3]

    padded = np.pad(array, [(0, 0)] * (array.ndim - 2) + [(k, k), (k, k)])
    offsets = np.arange(d)
    rows = (k + kernel.s)[:, np.newaxis, np.newaxis] + offsets[np.newaxis, :, np.newaxis]
    cols = (k + kernel.t)[:, np.newaxis, np.newaxis] + offsets[np.newaxis, np.newaxis, :]
    patches = padded[..., kernel.q[:, np.newaxis, np.newaxis], rows, cols]
    weighted = np.moveaxis(patches * kernel.values[:, np.newaxis, np.newaxis], -3, 0)

    out = np.zeros((kernel.out_channels,) + batch_shape + (d, d))
    np.add.at(out, kernel.p, weighted)
    return np.moveaxis(out, 0, -3)


def conv2d(kernel: ConvKernel, X: DataTensor) -> DataTensor:
    """
    多通道零填充卷积 K∗X

    [K∗X]_{p,m,n} = Σ_q Σ_{s,t} [K]_{p,q,s,t}·[ι(X)]_{q,m+s,n+t}

    Args:
        kernel: 卷积核
        X: 输入张量

    Returns:
        c′ 通道、空间尺寸不变的张量
    """
    return DataTensor(conv2d_array(kernel, X.values))


def relu(X: DataTensor) -> DataTensor:
    """逐元素 max(x, 0)"""
    return DataTensor(np.maximum(X.values, 0.0))


def vectorize(X: DataTensor) -> np.ndarray:
    """位置 (q−1)d²+(m−1)d+n 上的条目为 [X]_{q,m,n}"""
    return X.values.reshape(-1).copy()


def devectorize(vector, channels: int, spatial: int) -> DataTensor:
    """vectorize 的逆"""
    vector = np.asarray(vector, dtype=np.float64)
    if vector.shape != (channels * spatial * spatial,):
        raise ShapeError(f"向量长度 {vector.shape} 与 {channels}×{spatial}×{spatial} 不一致")
    return DataTensor(vector.reshape(channels, spatial, spatial))
