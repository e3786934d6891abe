#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
稀疏网格模块
分层帽函数基、索引集、分层系数、截断展开以及计数量 θ_n、τ_N
"""

import math
import sys
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

sys.path.append(str(Path(__file__).parent.parent))

from utils.error_handler import (
    IndexRangeError,
    InvalidLevelError,
    InvalidParameterError,
    ShapeError,
    UnsupportedConstructionError,
)
from utils.logger import get_logger

logger = get_logger(__name__)


def _check_level_index_1d(l: int, i: int):
    if l < 1:
        raise IndexRangeError(f"层级 l 必须 ≥ 1，实际 {l}")
    if i % 2 == 0 or not 1 <= i <= 2 ** l - 1:
        raise IndexRangeError(f"索引 i={i} 不在 I_{l} 中(要求为奇数且 1 ≤ i ≤ {2 ** l - 1})")


@dataclass(frozen=True, order=True)
class LevelIndex:
    """
    多重指标对 (l, i)，对应基函数 φ_{l,i}

    Args:
        l: 各维层级，l_j ≥ 1
        i: 各维位置，i_j 为奇数且 1 ≤ i_j ≤ 2^{l_j} − 1
    """
    l: Tuple[int, ...]
    i: Tuple[int, ...]

    def __post_init__(self):
        l = tuple(int(v) for v in self.l)
        i = tuple(int(v) for v in self.i)
        if len(l) != len(i) or not l:
            raise ShapeError(f"l 与 i 的维数必须相同且非零: {len(l)} 与 {len(i)}")
        for lj, ij in zip(l, i):
            _check_level_index_1d(lj, ij)
        object.__setattr__(self, 'l', l)
        object.__setattr__(self, 'i', i)

    @classmethod
    def ones(cls, dimension: int) -> "LevelIndex":
        """(1⃗, 1⃗)"""
        return cls((1,) * dimension, (1,) * dimension)

    @property
    def dimension(self) -> int:
        return len(self.l)

    @property
    def level_sum(self) -> int:
        """|l|_1"""
        return sum(self.l)

    @property
    def mesh_widths(self) -> np.ndarray:
        """h_{l_j} = 2^{−l_j}"""
        return np.array([2.0 ** -lj for lj in self.l])

    @property
    def grid_point(self) -> np.ndarray:
        """x_{l,i} = i·h_l"""
        return np.array(self.i, dtype=np.float64) * self.mesh_widths

    @property
    def support(self) -> np.ndarray:
        """支撑盒 [x − h, x + h]，形如 (D, 2)"""
        center, width = self.grid_point, self.mesh_widths
        return np.stack([center - width, center + width], axis=1)

    def sort_key(self) -> Tuple:
        """枚举顺序 (|l|_1, l, i)"""
        return (self.level_sum, self.l, self.i)


def hat_1d(l: int, i: int, x):
    """
    一维帽函数 φ_{l,i}(x) = φ((x − x_{l,i})/h_l)，φ(x) = max(1 − |x|, 0)

    Args:
        l: 层级
        i: 奇数位置
        x: 标量或数组

    Returns:
        与 x 同形的值
    """
    _check_level_index_1d(l, i)
    x = np.asarray(x, dtype=np.float64)
    scale = 2.0 ** l
    return np.maximum(1.0 - np.abs(x * scale - i), 0.0)


def basis_nd(li: LevelIndex, x):
    """
    张量积基函数 φ_{l,i}(x) = ∏_j φ_{l_j,i_j}(x_j)

    Args:
        li: 层级索引
        x: 形如 (..., D) 的点

    Returns:
        形如 (...) 的值
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1:] != (li.dimension,):
        raise ShapeError(f"点的维数 {x.shape[-1:]} 与基函数维数 {li.dimension} 不一致")
    result = np.ones(x.shape[:-1])
    for j, (lj, ij) in enumerate(zip(li.l, li.i)):
        result = result * hat_1d(lj, ij, x[..., j])
    return result


def conjugate_exponent(p: float) -> float:
    """1/p + 1/q = 1，p = ∞ 时 q = 1"""
    if p < 1:
        raise InvalidParameterError(f"p 必须 ≥ 1，实际 {p}")
    if math.isinf(p):
        return 1.0
    if p == 1:
        return math.inf
    return p / (p - 1.0)


def basis_lp_norm(li: LevelIndex, p: float) -> float:
    """
    ‖φ_{l,i}‖_p = (2/(p+1))^{D/p}·2^{−|l|_1/p}，p = ∞ 时为 1
    """
    if math.isinf(p):
        return 1.0
    if p < 1:
        raise InvalidParameterError(f"p 必须 ≥ 1，实际 {p}")
    return (2.0 / (p + 1.0)) ** (li.dimension / p) * 2.0 ** (-li.level_sum / p)


def coefficient_bound(li: LevelIndex, p: float, norm: float = 1.0) -> float:
    """
    |v_{l,i}| ≤ 2^{−|l|_1−D}·(2/(q+1))^{D/q}·2^{−|l|_1/q}·‖f‖_{X^{2,p}}

    Args:
        li: 层级索引
        p: 函数所在空间的指数，q 为其共轭
        norm: ‖f‖_{X^{2,p}}

    Returns:
        系数上界
    """
    q = conjugate_exponent(p)
    level_sum, dimension = li.level_sum, li.dimension
    if math.isinf(q):
        q_factor = 1.0
    else:
        q_factor = (2.0 / (q + 1.0)) ** (dimension / q) * 2.0 ** (-level_sum / q)
    return 2.0 ** (-level_sum - dimension) * q_factor * norm


def _levels_with_sum(dimension: int, total: int) -> Iterator[Tuple[int, ...]]:
    """各分量 ≥ 1、和为 total 的 l，按字典序"""
    if dimension == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - dimension + 2):
        for rest in _levels_with_sum(dimension - 1, total - first):
            yield (first,) + rest


def _odd_positions(level: int) -> range:
    return range(1, 2 ** level, 2)


def enumerate_indices(dimension: int, n: int) -> List[LevelIndex]:
    """
    枚举 Ξ_n = {(l, i) : |l|_1 ≤ n + D − 1, i ∈ I_l}

    Args:
        dimension: 维数 D
        n: 层级预算 n ≥ 1

    Returns:
        按 (|l|_1, l, i) 字典序排列的索引，长度为 θ_n
    """
    if n < 1:
        raise InvalidLevelError(f"层级 n 必须 ≥ 1，实际 {n}")
    indices = []
    for total in range(dimension, n + dimension):
        for level in _levels_with_sum(dimension, total):
            for position in product(*(_odd_positions(lj) for lj in level)):
                indices.append(LevelIndex(level, position))
    return indices


def count_indices(dimension: int, n: int) -> int:
    """
    θ_n = |Ξ_n| = Σ_{j=0}^{n−1} C(D−1+j, j)·2^j

    和为 D+j 的层级有 C(D−1+j, j) 个，每个对应 2^j 个位置。
    """
    if n < 1:
        raise InvalidLevelError(f"层级 n 必须 ≥ 1，实际 {n}")
    return sum(math.comb(dimension - 1 + j, j) * 2 ** j for j in range(n))


def tau_N(N: int, dimension: int) -> int:
    """
    τ_N = max{n : θ_n ≤ N}

    Args:
        N: 参数规模，N ≥ θ_1 = 1
        dimension: 维数 D

    Returns:
        τ_N
    """
    if N < count_indices(dimension, 1):
        raise InvalidParameterError(f"N={N} 小于 θ_1")
    n = 1
    while count_indices(dimension, n + 1) <= N:
        n += 1
    return n


@dataclass(frozen=True)
class SparseExpansion:
    """
    截断展开 f_n^{(1)} = Σ v_{l,i}·φ_{l,i}

    Args:
        dimension: 维数 D
        level_budget: 层级预算 n
        terms: ((l, i), v_{l,i}) 序列，按枚举顺序保存
    """
    dimension: int
    level_budget: int
    terms: Tuple[Tuple[LevelIndex, float], ...] = ()

    def __post_init__(self):
        if self.level_budget < 1:
            raise InvalidLevelError(f"层级预算 n 必须 ≥ 1，实际 {self.level_budget}")
        terms = tuple(sorted(((li, float(v)) for li, v in self.terms), key=lambda term: term[0].sort_key()))
        limit = self.level_budget + self.dimension - 1
        seen = set()
        for li, _ in terms:
            if li.dimension != self.dimension:
                raise ShapeError(f"项 {li} 的维数与展开维数 {self.dimension} 不一致")
            if li.level_sum > limit:
                raise InvalidParameterError(f"项 {li} 超出层级预算 |l|_1 ≤ {limit}")
            if li in seen:
                raise InvalidParameterError(f"重复的项 {li}")
            seen.add(li)
        object.__setattr__(self, 'terms', terms)

    @classmethod
    def single(cls, li: LevelIndex, level_budget: int, coefficient: float = 1.0) -> "SparseExpansion":
        return cls(li.dimension, level_budget, ((li, coefficient),))

    @property
    def coefficients(self) -> Dict[LevelIndex, float]:
        return dict(self.terms)

    @property
    def indices(self) -> List[LevelIndex]:
        return [li for li, _ in self.terms]

    @property
    def total_variation(self) -> float:
        """Σ|v_{l,i}|"""
        return float(sum(abs(v) for _, v in self.terms))


def eval_truncation(expansion: SparseExpansion, x):
    """
    Σ v_{l,i}·φ_{l,i}(x)

    Args:
        expansion: 截断展开
        x: 形如 (..., D) 的点

    Returns:
        形如 (...) 的值
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1:] != (expansion.dimension,):
        raise ShapeError(f"点的维数 {x.shape[-1:]} 与展开维数 {expansion.dimension} 不一致")
    result = np.zeros(x.shape[:-1])
    for li, coefficient in expansion.terms:
        result = result + coefficient * basis_nd(li, x)
    return result


def surplus_1d(f: Callable, l: int, i: int) -> float:
    """一维分层余量 w = f(x) − ½(f(x−h) + f(x+h))"""
    _check_level_index_1d(l, i)
    h = 2.0 ** -l
    x = i * h
    return float(f(x) - 0.5 * (f(x - h) + f(x + h)))


def hierarchize_separable(
    f1d: Sequence[Callable],
    dimension: int,
    n: int,
    keep_zeros: bool = False
) -> SparseExpansion:
    """
    可分离函数 f(x) = ∏_j f_j(x_j) 的截断展开

    v_{l,i} = ∏_j w_{l_j,i_j}(f_j)。先按维计算全部一维余量，
    只组合非零余量，因而无需遍历整个 Ξ_n。

    Args:
        f1d: D 个一维函数，各自在 0 和 1 处为零
        dimension: 维数 D
        n: 层级预算
        keep_zeros: 是否保留系数为零的项

    Returns:
        SparseExpansion
    """
    if callable(f1d) or len(f1d) != dimension:
        raise UnsupportedConstructionError("只支持由 D 个一维因子给出的可分离函数")
    if n < 1:
        raise InvalidLevelError(f"层级 n 必须 ≥ 1，实际 {n}")

    limit = n + dimension - 1
    max_level = n
    per_axis = []
    for f in f1d:
        boundary = (float(f(0.0)), float(f(1.0)))
        if boundary != (0.0, 0.0):
            logger.warning(f"一维因子在边界处不为零 {boundary}，展开只在内部有意义")
        entries = []
        for level in range(1, max_level + 1):
            for position in _odd_positions(level):
                w = surplus_1d(f, level, position)
                if keep_zeros or w != 0.0:
                    entries.append((level, position, w))
        per_axis.append(entries)

    terms = []

    def extend(axis: int, levels: Tuple[int, ...], positions: Tuple[int, ...], value: float, used: int):
        if axis == dimension:
            terms.append((LevelIndex(levels, positions), value))
            return
        remaining_axes = dimension - axis - 1
        for level, position, w in per_axis[axis]:
            if used + level + remaining_axes > limit:
                continue
            extend(axis + 1, levels + (level,), positions + (position,), value * w, used + level)

    extend(0, (), (), 1.0, 0)
    logger.debug(f"分层展开: D={dimension}, n={n}, 非零项 {len(terms)}")
    return SparseExpansion(dimension, n, tuple(terms))
