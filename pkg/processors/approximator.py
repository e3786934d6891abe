#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
逼近器模块
组装完整网络 h_n：输入复制核、全部 g_{l,i} 的拼接、读出系数，以及规模统计、N 的选取与误差测量
"""

import math
import sys
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

sys.path.append(str(Path(__file__).parent.parent))

from processors.basis_network import BasisNet, basis_error_bound, build_basis_net
from processors.cnn_builder import (
    ConvLayer,
    ConvNet,
    HypothesisFunction,
    compose,
    concatenate_all,
    deepen,
    size_of,
)
from processors.product_network import log2_exact
from processors.scalar_networks import _check_level
from processors.sparse_grid import (
    LevelIndex,
    SparseExpansion,
    count_indices,
    enumerate_indices,
    tau_N,
)
from processors.tensor_core import BiasVector, KernelBuilder
from utils.error_handler import (
    InvalidParameterError,
    ShapeError,
    UnsupportedConstructionError,
)
from utils.logger import get_logger
from utils.performance import BatchEvaluator, performance_monitor, timing_decorator
from utils.sampling import (
    axis_midpoints,
    grid_points,
    make_generator,
    pair_points,
    points_to_tensors,
    uniform_points,
)

logger = get_logger(__name__)

INDEX_SETS = ("full", "expansion")

# 单个逼近器最多用到 θ_n 个基网络，扫描时旧的条目按 LRU 淘汰
BASIS_CACHE_SIZE = 4096


def approximator_depth(n: int, d: int) -> int:
    """2(2n+3)·log₂d + 6d"""
    return 2 * (2 * n + 3) * log2_exact(d) + 6 * d


@dataclass(frozen=True, eq=False)
class KorobovApproximator:
    """
    完整逼近器 h_n

    Args:
        n: 层级
        d: 空间尺寸
        half_width: 核半宽 k
        expansion: 被逼近的截断展开，维数 d²
        index_set: "full" 表示覆盖整个 Ξ_n，"expansion" 表示只含展开中的项
        indices: 双射 μ，第 c 个通道组对应 indices[c−1]
        h: 假设函数
        size_breakdown: 各部分的规模
    """
    n: int
    d: int
    half_width: int
    expansion: SparseExpansion
    index_set: str
    indices: Tuple[LevelIndex, ...]
    h: HypothesisFunction
    size_breakdown: Dict[str, int] = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.d * self.d

    @property
    def theta(self) -> int:
        """θ_n = |Ξ_n|"""
        return count_indices(self.dimension, self.n)

    @property
    def width(self) -> int:
        return self.h.net.width

    @property
    def depth(self) -> int:
        return self.h.net.depth

    @property
    def size(self) -> int:
        return size_of(self.h)

    def evaluate_points(self, points: np.ndarray, evaluator: Optional[BatchEvaluator] = None) -> np.ndarray:
        """
        在 [0,1]^{d²} 的点上求值 h_n，点按 vect 的顺序排成张量

        Args:
            points: 形如 (N, d²) 的点
            evaluator: 批量评估器

        Returns:
            形如 (N,) 的值
        """
        tensors = points_to_tensors(points, self.d)
        if evaluator is None:
            return self.h.evaluate_array(tensors)
        return evaluator.map(self.h.evaluate_array, tensors)


@lru_cache(maxsize=BASIS_CACHE_SIZE)
def _cached_basis_net(li: LevelIndex, n: int, d: int, k: int) -> BasisNet:
    return build_basis_net(li, n, d, k)


def _duplication_layer(copies: int, k: int) -> ConvLayer:
    """K：1 → θ 个通道，全部为 S^{0,0}"""
    builder = KernelBuilder(copies, 1, k)
    for c in range(1, copies + 1):
        builder.add(c, 1, 0, 0, 1.0)
    return ConvLayer(builder.build(), BiasVector.zeros(copies))


@timing_decorator(performance_monitor)
def build_approximator(
    expansion: SparseExpansion,
    n: int,
    d: int,
    k: int = 1,
    index_set: str = "full"
) -> KorobovApproximator:
    """
    构造 h_n(X) = Σ v_{l,i}·[g_{l,i}(X)]_{d,d}

    网络为 deepen((⊕ g_{l,i}) ∘ σA_K)，读出系数 α_{c·d²} = v_{μ(c)}、β = 0。

    Args:
        expansion: 截断展开，维数 d²，各项满足层级预算 n
        n: 层级
        d: 空间尺寸，d ≥ 3 且为 2 的幂
        k: 核半宽
        index_set: "full" 覆盖整个 Ξ_n；"expansion" 只构造展开中的项(输出相同)

    Returns:
        KorobovApproximator
    """
    _check_level(n)
    if d < 3:
        raise UnsupportedConstructionError(f"逼近器要求 d ≥ 3，实际 d={d}")
    log2_exact(d)
    if index_set not in INDEX_SETS:
        raise InvalidParameterError(f"未知索引模式 {index_set}，可选 {INDEX_SETS}")

    dimension = d * d
    if expansion.dimension != dimension:
        raise ShapeError(f"展开维数 {expansion.dimension} 与 d²={dimension} 不一致")
    limit = n + dimension - 1
    for li, _ in expansion.terms:
        if li.level_sum > limit:
            raise InvalidParameterError(f"项 {li} 超出层级 n={n} 的预算 |l|_1 ≤ {limit}")

    if index_set == "full":
        indices = tuple(enumerate_indices(dimension, n))
    else:
        indices = tuple(expansion.indices)
    coefficients = expansion.coefficients
    copies = len(indices)

    if copies == 0:
        # 空展开：单层全零核，读出全为结构零
        empty = ConvLayer(KernelBuilder(1, 1, k).build(), BiasVector.zeros(1))
        net = deepen(ConvNet((empty,), 1, d, k), approximator_depth(n, d))
        h = HypothesisFunction(net, np.zeros(d * d), 0.0, np.zeros(d * d, dtype=bool), beta_free=False)
        return KorobovApproximator(n, d, k, expansion, index_set, (), h, {"readout": 0})

    logger.info(f"构造逼近器: d={d}, n={n}, k={k}, 基网络 {copies} 个 ({index_set})")
    basis_nets = [_cached_basis_net(li, n, d, k) for li in indices]
    duplication = ConvNet((_duplication_layer(copies, k),), 1, d, k)
    body = concatenate_all([basis.net for basis in basis_nets])
    stacked = compose(duplication, body)
    net = deepen(stacked, approximator_depth(n, d))

    alpha = np.zeros(copies * dimension)
    support = np.zeros(copies * dimension, dtype=bool)
    for c, li in enumerate(indices, 1):
        alpha[c * dimension - 1] = coefficients.get(li, 0.0)
        support[c * dimension - 1] = True
    h = HypothesisFunction(net, alpha, 0.0, support, beta_free=False)

    breakdown = {
        "duplication": duplication.size,
        "basis_nets": sum(basis.net.size for basis in basis_nets),
        "deepening": net.size - stacked.size,
        "readout": h.readout_size,
    }
    logger.info(f"逼近器完成: 宽度 {net.width}, 深度 {net.depth}, 规模 {size_of(h)}")
    return KorobovApproximator(n, d, k, expansion, index_set, indices, h, breakdown)


@dataclass(frozen=True)
class SizeReport:
    """
    规模检查报告

    Args:
        size: size_of(h)
        N: 参数 N
        bound: 24(2k+1)²d⁵·N·log₂N
        n_form_bound: 24(2k+1)²d⁵·n·θ_n
        construction_bound: θ_n(2k+1)²·4d⁴·(2(2n+3)log₂d+5d) + θ_n((2k+1)²+2)
        regime: "N" 表示按 N 形式判定，"n" 表示 log₂N < n 时改用 n 形式
        passed: 是否通过
        breakdown: 各部分规模，和为 size
    """
    size: int
    N: int
    bound: float
    n_form_bound: float
    construction_bound: float
    regime: str
    passed: bool
    breakdown: Dict[str, int]


def check_size_bound(app: KorobovApproximator, N: Optional[int] = None) -> SizeReport:
    """
    检查 size_of(h) ≤ 24(2k+1)²d⁵·N·log₂N

    N < 2^n 时 log₂N < n，N 形式的界不适用(例如 N = θ_1 = 1)，
    此时改用 n 形式的界 24(2k+1)²d⁵·n·θ_n 并在报告中注明。

    Args:
        app: 逼近器
        N: 参数规模，缺省为 θ_n，须满足 θ_n ≤ N

    Returns:
        SizeReport
    """
    theta = app.theta
    N = theta if N is None else int(N)
    if N < theta:
        raise InvalidParameterError(f"N={N} 小于 θ_{app.n}={theta}")

    k, d, n = app.half_width, app.d, app.n
    prefactor = 24 * (2 * k + 1) ** 2 * d ** 5
    bound = prefactor * N * math.log2(N)
    n_form_bound = prefactor * n * theta
    spatial = (2 * k + 1) ** 2
    construction_bound = (
        theta * spatial * 4 * d ** 4 * (2 * (2 * n + 3) * log2_exact(d) + 5 * d)
        + theta * (spatial + 2)
    )

    size = app.size
    regime = "N" if math.log2(N) >= n else "n"
    passed = size <= (bound if regime == "N" else n_form_bound)
    if not passed:
        logger.error(f"规模超界: size={size}, N={N}, 判定形式 {regime}")
    return SizeReport(
        size=size,
        N=N,
        bound=bound,
        n_form_bound=n_form_bound,
        construction_bound=construction_bound,
        regime=regime,
        passed=passed,
        breakdown=dict(app.size_breakdown),
    )


def _selection_exponents(p: float, d: int) -> Tuple[float, float, float]:
    """(β, p/(2p−1), (3p−1)/(2p−1))，p = ∞ 取极限"""
    if math.isinf(p):
        ratio, power = 1.5, 0.5
    else:
        ratio = (3.0 * p - 1.0) / (2.0 * p - 1.0)
        power = p / (2.0 * p - 1.0)
    return ratio * (d * d - 1), power, ratio


def selection_beta(p: float, d: int) -> float:
    """β = (3p−1)/(2p−1)·(d²−1)"""
    return _selection_exponents(p, d)[0]


def _check_p(p: float):
    if not (p >= 2 or math.isinf(p)):
        raise InvalidParameterError(f"p 必须在 [2, ∞] 内，实际 {p}")


def error_bound_for_N_log2(N: int, p: float, d: int) -> float:
    """log₂ 形式的 4/2^{(1−1/p)d²}·(log₂N)^{(3−1/p)(d²−1)}/N^{2−1/p}"""
    _check_p(p)
    if N < 2:
        raise InvalidParameterError(f"误差界要求 N ≥ 2，实际 {N}")
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    log2_n = math.log2(N)
    return (
        2.0 - (1.0 - inv_p) * d * d
        + (3.0 - inv_p) * (d * d - 1) * math.log2(log2_n)
        - (2.0 - inv_p) * log2_n
    )


def error_bound_for_N(N: int, p: float, d: int) -> float:
    """误差界本身，N 很大时可能下溢为 0"""
    return 2.0 ** error_bound_for_N_log2(N, p, d)


def truncation_error_bound(n: int, p: float, d: int) -> float:
    """n 形式的误差界 4·2^{−(1−1/p)d²}·2^{−(2−1/p)n}·n^{d²−1}"""
    _check_level(n)
    _check_p(p)
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    return 4.0 * 2.0 ** (-(1.0 - inv_p) * d * d) * 2.0 ** (-(2.0 - inv_p) * n) * float(n) ** (d * d - 1)


def select_N(epsilon: float, p: float, d: int) -> int:
    """
    选取 N 使误差界不超过 ε

    N = ⌈(6β log₂β)^β·(1/γ)·((3p−1)/(2p−1))^β·ε^{−p/(2p−1)}·|log₂ε|^β⌉，
    β = (3p−1)/(2p−1)·(d²−1)，γ = (2^{(1−1/p)d²−2})^{p/(2p−1)}。
    全程在 log₂ 下计算；结果超出浮点范围或不满足所需不等式时报错。

    Args:
        epsilon: 目标精度，0 < ε < 1
        p: 范数指数，2 ≤ p ≤ ∞
        d: 空间尺寸

    Returns:
        N
    """
    _check_p(p)
    if not 0.0 < epsilon < 1.0:
        raise InvalidParameterError(f"ε 必须在 (0, 1) 内，实际 {epsilon}")
    if d < 2:
        raise InvalidParameterError(f"d 必须 ≥ 2，实际 {d}")

    beta, power, ratio = _selection_exponents(p, d)
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    log2_gamma = power * ((1.0 - inv_p) * d * d - 2.0)
    log2_eps = math.log2(epsilon)

    log2_N = (
        beta * math.log2(6.0 * beta * math.log2(beta))
        - log2_gamma
        + beta * math.log2(ratio)
        - power * log2_eps
        + beta * math.log2(abs(log2_eps))
    )
    if log2_N > 1000:
        raise InvalidParameterError(f"ε={epsilon} 对应的 N ≈ 2^{log2_N:.1f} 超出可表示范围")

    N = math.ceil(2.0 ** log2_N)
    if error_bound_for_N_log2(N, p, d) > log2_eps:
        raise InvalidParameterError(f"ε={epsilon} 不满足 N 选取所需的条件，选出的 N 不能保证误差界")
    return N


@dataclass(frozen=True)
class ArchitectureSummary:
    """给定 N 时的结构参数"""
    N: int
    n: int
    theta: int
    width_bound: int
    depth_bound: int


def architecture_for_N(N: int, d: int) -> ArchitectureSummary:
    """
    n = τ_N 时的宽度界 2Nd² 与深度界 2(2⌈log₂N⌉+3)log₂d + 6d

    Args:
        N: 参数规模
        d: 空间尺寸

    Returns:
        ArchitectureSummary
    """
    dimension = d * d
    n = tau_N(N, dimension)
    return ArchitectureSummary(
        N=N,
        n=n,
        theta=count_indices(dimension, n),
        width_bound=2 * N * dimension,
        depth_bound=2 * (2 * math.ceil(math.log2(N)) + 3) * log2_exact(d) + 6 * d,
    )


@dataclass(frozen=True)
class ErrorEstimate:
    """
    误差测量结果

    Args:
        value: p = ∞ 时为最大绝对误差，否则为 L^p 误差的蒙特卡罗估计
        standard_error: 蒙特卡罗标准误(p = ∞ 时为 0)
        points: 参与比较的点数
        p: 范数指数
    """
    value: float
    standard_error: float
    points: int
    p: float


def structured_points(expansion: SparseExpansion) -> np.ndarray:
    """
    展开中各项的网格点与沿坐标轴的支撑中点

    只取展开自身的项，不遍历预算内的全部稀疏网格节点：Ξ_n 的规模随 n 迅速增长，
    其余节点上的误差由随机点覆盖。每项贡献 1 + 2D 个点。
    """
    if not expansion.terms:
        return np.zeros((0, expansion.dimension))
    blocks = [grid_points(expansion.indices), axis_midpoints(expansion.indices)]
    return np.concatenate(blocks, axis=0)


def measure_error(
    app: KorobovApproximator,
    f_ref: Callable[[np.ndarray], np.ndarray],
    p: float,
    samples: int,
    seed: int,
    sampling: str = "uniform",
    evaluator: Optional[BatchEvaluator] = None
) -> ErrorEstimate:
    """
    测量 |f_ref(vect(X)) − h_n(X)|

    p = ∞ 时取结构点与随机点上的最大值；有限 p 时用均匀随机点做蒙特卡罗估计，
    并给出标准误。

    Args:
        app: 逼近器
        f_ref: 作用在 (N, d²) 点上的参照函数
        p: 范数指数
        samples: 随机点个数 ≥ 1
        seed: 随机种子
        sampling: "uniform" 或 "pairs"(仅 p = ∞)
        evaluator: 批量评估器

    Returns:
        ErrorEstimate
    """
    if samples < 1:
        raise InvalidParameterError(f"samples 必须 ≥ 1，实际 {samples}")
    if p < 1:
        raise InvalidParameterError(f"p 必须 ≥ 1，实际 {p}")
    rng = make_generator(seed)
    dimension = app.dimension

    if not math.isinf(p):
        points = uniform_points(rng, samples, dimension)
        diff = np.abs(np.asarray(f_ref(points)) - app.evaluate_points(points, evaluator))
        powered = diff ** p
        mean = float(powered.mean())
        value = mean ** (1.0 / p)
        if samples > 1 and mean > 0.0:
            mean_error = float(powered.std(ddof=1)) / math.sqrt(samples)
            standard_error = (1.0 / p) * mean ** (1.0 / p - 1.0) * mean_error
        else:
            standard_error = 0.0
        return ErrorEstimate(value, standard_error, samples, p)

    if sampling == "uniform":
        random_points = uniform_points(rng, samples, dimension)
    elif sampling == "pairs":
        if not app.expansion.terms:
            random_points = uniform_points(rng, samples, dimension)
        else:
            random_points = pair_points(rng, samples, app.expansion.indices)
    else:
        raise InvalidParameterError(f"未知采样方式 {sampling}")

    points = np.concatenate([structured_points(app.expansion), random_points], axis=0)
    diff = np.abs(np.asarray(f_ref(points)) - app.evaluate_points(points, evaluator))
    value = float(diff.max()) if len(diff) else 0.0
    logger.debug(f"误差测量: {len(points)} 个点, 最大误差 {value:.3e}")
    return ErrorEstimate(value, 0.0, len(points), p)


def e2e_error_bound(app: KorobovApproximator) -> float:
    """(3/2)·2^{−2n}(d²−1)·Σ|v_{l,i}|"""
    return basis_error_bound(app.n, app.d) * app.expansion.total_variation
