#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
乘积网络单元测试
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# 添加项目路径
sys.path.append(str(Path(__file__).parent.parent))

from processors.product_network import (
    build_product_net,
    column_reduction_oracle,
    log2_exact,
    product_depth,
    product_error_bound,
    reduction_oracle,
)
from processors.scalar_networks import prd_oracle
from processors.tensor_core import DataTensor
from utils.error_handler import InvalidLevelError, ShapeError, UnsupportedConstructionError
from utils.sampling import make_generator, product_pair_tensors, uniform_tensors


class TestHelpers:
    """辅助函数测试类"""

    def test_log2_exact(self):
        """只接受 2 的幂"""
        assert log2_exact(2) == 1
        assert log2_exact(8) == 3
        for d in (1, 3, 6, 12):
            with pytest.raises(UnsupportedConstructionError):
                log2_exact(d)

    def test_depth_formula(self):
        """深度 2(2n+3)log₂d + 2(d−1)"""
        assert product_depth(1, 4) == 2 * 5 * 2 + 6
        assert product_depth(3, 8) == 2 * 9 * 3 + 14

    def test_oracle_small(self):
        """d = 2 时归约为 prd(prd(a,b), prd(c,e))"""
        values = np.array([[0.3, 0.9], [0.6, 0.2]])
        X = DataTensor.from_matrix(values)
        n = 2
        rows = prd_oracle(n, values[:, 0], values[:, 1])
        np.testing.assert_allclose(column_reduction_oracle(n, X), rows)
        assert reduction_oracle(n, X) == pytest.approx(float(prd_oracle(n, rows[0], rows[1])))

    def test_oracle_rejects_multichannel(self):
        """归约只作用于单通道"""
        with pytest.raises(ShapeError):
            reduction_oracle(1, DataTensor.zeros(2, 4))


class TestProductNet:
    """乘积网络测试类"""

    @pytest.fixture(params=[(1, 4), (3, 4), (2, 8)])
    def product(self, request):
        n, d = request.param
        return build_product_net(n, d)

    def test_structure(self, product):
        """宽 12，深度符合公式，单通道输入输出"""
        net = product.net
        assert net.width <= 12
        assert net.depth == product_depth(product.n, product.d) == product.expected_depth
        assert net.input_channels == 1 and net.output_channels == 1
        assert net.depth == product.column_stage.depth + product.row_stage.depth

    def test_matches_oracle(self, product):
        """(d, d) 处输出等于先列后行的 prd_n 归约"""
        d = product.d
        inputs = uniform_tensors(make_generator(21), 60, 1, d)
        out = product.net.forward_array(inputs)[:, 0, -1, -1]
        oracle = np.array([reduction_oracle(product.n, DataTensor(x)) for x in inputs])
        np.testing.assert_allclose(out, oracle, atol=1e-9)

    def test_column_stage(self, product):
        """列归约后第 d 列保存每行的归约结果"""
        inputs = uniform_tensors(make_generator(22), 20, 1, product.d)
        out = product.column_stage.forward_array(inputs)[:, 0, :, -1]
        oracle = np.array([column_reduction_oracle(product.n, DataTensor(x)) for x in inputs])
        np.testing.assert_allclose(out, oracle, atol=1e-9)

    def test_error_bound(self, product):
        """|Π̃_n(X) − ∏X| ≤ 3·2^{−2n−1}(d²−1)"""
        d = product.d
        inputs = uniform_tensors(make_generator(23), 100, 1, d)
        out = product.net.forward_array(inputs)[:, 0, -1, -1]
        exact = np.prod(inputs.reshape(100, -1), axis=1)
        assert np.abs(out - exact).max() <= product_error_bound(product.n, d)

    def test_zero_and_one_propagation(self, product):
        """全 1 输入精确为 1，含 0 输入精确为 0"""
        d = product.d
        ones = np.ones((1, 1, d, d))
        assert product.net.forward_array(ones)[0, 0, -1, -1] == 1.0
        inputs = uniform_tensors(make_generator(24), 30, 1, d)
        inputs[np.arange(30), 0, np.arange(30) % d, (3 * np.arange(30)) % d] = 0.0
        assert not product.net.forward_array(inputs)[:, 0, -1, -1].any()

    def test_lanes_stay_in_unit_interval(self, product):
        """所有隐藏层激活值都在 [0, 1] 内"""
        inputs = uniform_tensors(make_generator(25), 20, 1, product.d)
        for activation in product.net.trace_array(inputs):
            assert activation.min() >= 0.0
            assert activation.max() <= 1.0 + 1e-12


class TestProductRate:
    """收敛速率测试类"""

    def test_error_shrinks_with_n(self):
        """成对扰动输入上，n 每加 1 误差至少缩小 3 倍"""
        d = 4
        inputs = product_pair_tensors(make_generator(7), 300, d)
        exact = np.prod(inputs.reshape(300, -1), axis=1)
        errors = []
        for n in range(1, 6):
            out = build_product_net(n, d).net.forward_array(inputs)[:, 0, -1, -1]
            errors.append(np.abs(out - exact).max())
        for previous, current in zip(errors, errors[1:]):
            assert previous >= 3.0 * current

    @pytest.mark.parametrize("n", range(1, 7))
    def test_error_bound_at_d8(self, n):
        """d = 8 时 n = 1..6 都满足 |Π̃_n(X) − ∏X| ≤ 3·2^{−2n−1}(d²−1)"""
        d = 8
        net = build_product_net(n, d).net
        rng = make_generator(26)
        for inputs in (uniform_tensors(rng, 500, 1, d), product_pair_tensors(rng, 500, d)):
            out = net.forward_array(inputs)[:, 0, -1, -1]
            exact = np.prod(inputs.reshape(len(inputs), -1), axis=1)
            assert np.abs(out - exact).max() <= product_error_bound(n, d)

    def test_invalid_parameters(self):
        """n ≥ 1，k ≥ 1，d 为 2 的幂"""
        with pytest.raises(InvalidLevelError):
            build_product_net(0, 4)
        with pytest.raises(ShapeError):
            build_product_net(1, 4, 0)
        with pytest.raises(UnsupportedConstructionError):
            build_product_net(1, 6)
