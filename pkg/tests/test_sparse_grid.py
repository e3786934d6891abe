#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
稀疏网格单元测试
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate

# 添加项目路径
sys.path.append(str(Path(__file__).parent.parent))

from processors.sparse_grid import (
    LevelIndex,
    SparseExpansion,
    basis_lp_norm,
    basis_nd,
    coefficient_bound,
    conjugate_exponent,
    count_indices,
    enumerate_indices,
    eval_truncation,
    hat_1d,
    hierarchize_separable,
    surplus_1d,
    tau_N,
)
from utils.error_handler import (
    IndexRangeError,
    InvalidLevelError,
    InvalidParameterError,
    ShapeError,
    UnsupportedConstructionError,
)
from utils.sampling import make_generator


def parabola(x):
    return 4.0 * x * (1.0 - x)


class TestLevelIndex:
    """层级索引测试类"""

    def test_validation(self):
        """i 必须为奇数且在 1..2^l−1 内"""
        with pytest.raises(IndexRangeError):
            LevelIndex((2,), (2,))
        with pytest.raises(IndexRangeError):
            LevelIndex((2,), (5,))
        with pytest.raises(IndexRangeError):
            LevelIndex((0,), (1,))
        with pytest.raises(ShapeError):
            LevelIndex((1, 1), (1,))

    def test_geometry(self):
        """网格点、网格宽度、支撑盒"""
        li = LevelIndex((2, 3), (3, 5))
        np.testing.assert_array_equal(li.grid_point, [0.75, 0.625])
        np.testing.assert_array_equal(li.mesh_widths, [0.25, 0.125])
        np.testing.assert_array_equal(li.support, [[0.5, 1.0], [0.5, 0.75]])
        assert li.level_sum == 5
        assert li.dimension == 2

    def test_ordering(self):
        """枚举顺序先比 |l|_1"""
        a = LevelIndex((1, 2), (1, 1))
        b = LevelIndex((2, 1), (1, 1))
        c = LevelIndex((1, 1), (1, 1))
        assert sorted([a, b, c], key=LevelIndex.sort_key) == [c, a, b]


class TestBasis:
    """基函数测试类"""

    def test_hat_1d(self):
        """峰值为 1，支撑外为 0"""
        assert hat_1d(2, 3, 0.75) == 1.0
        assert hat_1d(2, 3, 0.5) == 0.0
        assert hat_1d(2, 3, 0.625) == 0.5
        assert hat_1d(2, 3, 0.25) == 0.0

    def test_tensor_product(self):
        """φ_{l,i}(x) = ∏ φ_{l_j,i_j}(x_j)"""
        li = LevelIndex((1, 2), (1, 1))
        x = make_generator(1).random((50, 2))
        np.testing.assert_array_equal(basis_nd(li, x), hat_1d(1, 1, x[:, 0]) * hat_1d(2, 1, x[:, 1]))
        assert basis_nd(li, li.grid_point) == 1.0
        with pytest.raises(ShapeError):
            basis_nd(li, np.zeros(3))

    @pytest.mark.parametrize("li", [
        LevelIndex((1,), (1,)),
        LevelIndex((3,), (5,)),
        LevelIndex((1, 2), (1, 3)),
        LevelIndex((2, 2), (1, 3)),
    ])
    @pytest.mark.parametrize("p", [2.0, 3.0])
    def test_lp_norm_quadrature(self, li, p):
        """‖φ_{l,i}‖_p 与数值积分一致"""
        box = li.support
        points = list(li.grid_point)
        if li.dimension == 1:
            value, _ = integrate.quad(lambda x: float(basis_nd(li, np.array([x]))) ** p,
                                      box[0, 0], box[0, 1], points=points, epsabs=1e-14)
        else:
            value, _ = integrate.nquad(
                lambda y, x: float(basis_nd(li, np.array([x, y]))) ** p,
                [list(box[1]), list(box[0])],
                opts=[{"points": [points[1]], "epsabs": 1e-14}, {"points": [points[0]], "epsabs": 1e-14}],
            )
        assert value ** (1.0 / p) == pytest.approx(basis_lp_norm(li, p), rel=1e-6)

    def test_lp_norm_infinity(self):
        """p = ∞ 时范数为 1"""
        assert basis_lp_norm(LevelIndex((3, 2), (1, 1)), math.inf) == 1.0

    def test_conjugate(self):
        """共轭指数"""
        assert conjugate_exponent(2.0) == 2.0
        assert conjugate_exponent(math.inf) == 1.0
        assert conjugate_exponent(1.0) == math.inf
        with pytest.raises(InvalidParameterError):
            conjugate_exponent(0.5)

    def test_coefficient_bound_holds_for_parabola(self):
        """抛物线的分层系数不超过系数上界 (‖f‖ 取混合二阶导的上确界范数 8)"""
        li = LevelIndex((3,), (5,))
        w = surplus_1d(parabola, 3, 5)
        assert w == pytest.approx(4.0 ** -2)
        assert abs(w) <= coefficient_bound(li, math.inf, norm=8.0) + 1e-15


class TestIndexSets:
    """索引集测试类"""

    def test_counts(self):
        """D = 4 时 θ_1 = 1, θ_2 = 9, θ_3 = 49"""
        assert count_indices(4, 1) == 1
        assert count_indices(4, 2) == 9
        assert count_indices(4, 3) == 49
        assert count_indices(16, 2) == 33

    @pytest.mark.parametrize("dimension, n", [(1, 4), (2, 3), (3, 3), (4, 3)])
    def test_enumeration_matches_count(self, dimension, n):
        """枚举结果与闭式计数一致，且无重复、满足预算"""
        indices = enumerate_indices(dimension, n)
        assert len(indices) == count_indices(dimension, n)
        assert len(set(indices)) == len(indices)
        assert all(li.level_sum <= n + dimension - 1 for li in indices)
        assert indices == sorted(indices, key=LevelIndex.sort_key)

    def test_tau(self):
        """τ_N = max{n : θ_n ≤ N}"""
        assert tau_N(1, 4) == 1
        assert tau_N(8, 4) == 1
        assert tau_N(9, 4) == 2
        assert tau_N(48, 4) == 2
        assert tau_N(49, 4) == 3
        with pytest.raises(InvalidParameterError):
            tau_N(0, 4)

    def test_tau_bracket(self):
        """log₂(N/log₂³N) ≤ τ_N ≤ log₂N"""
        for N in range(10, 10_001, 7):
            tau = tau_N(N, 4)
            assert tau <= math.log2(N)
            assert math.log2(N / math.log2(N) ** 3) <= tau

    def test_invalid_level(self):
        """n ≥ 1"""
        with pytest.raises(InvalidLevelError):
            count_indices(4, 0)


class TestExpansion:
    """截断展开测试类"""

    def test_sorted_and_validated(self):
        """项按枚举顺序保存，重复与超预算报错"""
        a, b = LevelIndex((2, 1), (3, 1)), LevelIndex((1, 1), (1, 1))
        expansion = SparseExpansion(2, 2, ((a, 0.5), (b, -1.0)))
        assert expansion.indices == [b, a]
        assert expansion.total_variation == 1.5
        with pytest.raises(InvalidParameterError):
            SparseExpansion(2, 2, ((a, 1.0), (a, 2.0)))
        with pytest.raises(InvalidParameterError):
            SparseExpansion(2, 1, ((a, 1.0),))
        with pytest.raises(ShapeError):
            SparseExpansion(3, 2, ((a, 1.0),))

    def test_eval(self):
        """Σ v φ"""
        li = LevelIndex((1, 1), (1, 1))
        expansion = SparseExpansion.single(li, 1, 2.0)
        assert eval_truncation(expansion, np.array([0.5, 0.5])) == 2.0
        assert eval_truncation(expansion, np.array([0.25, 0.5])) == 1.0

    def test_hierarchize_1d_interpolates(self):
        """一维时截断展开是 2^{−n} 网格上的分段线性插值"""
        expansion = hierarchize_separable([parabola], 1, 3)
        grid = np.arange(9)[:, np.newaxis] / 8.0
        np.testing.assert_allclose(eval_truncation(expansion, grid), parabola(grid[:, 0]), atol=1e-14)
        assert len(expansion.terms) == 7

    def test_hierarchize_separable_product(self):
        """可分离函数的系数为一维余量之积"""
        expansion = hierarchize_separable([parabola, parabola], 2, 2)
        coefficients = expansion.coefficients
        assert coefficients[LevelIndex((1, 1), (1, 1))] == pytest.approx(1.0)
        assert coefficients[LevelIndex((2, 1), (3, 1))] == pytest.approx(0.25)
        assert all(li.level_sum <= 3 for li in expansion.indices)
        assert len(expansion.terms) == 1 + 2 + 2

    def test_hierarchize_requires_factors(self):
        """单个多元函数不支持"""
        with pytest.raises(UnsupportedConstructionError):
            hierarchize_separable(lambda x: x, 2, 2)
