#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
张量与卷积核单元测试
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from scipy.signal import correlate2d

# 添加项目路径
sys.path.append(str(Path(__file__).parent.parent))

from processors.tensor_core import (
    BiasVector,
    ConvKernel,
    DataTensor,
    KernelBuilder,
    conv2d,
    conv2d_array,
    devectorize,
    relu,
    vectorize,
    zero_pad_lookup,
)
from utils.error_handler import IndexRangeError, ShapeError
from utils.sampling import make_generator


def naive_conv(kernel: ConvKernel, X: DataTensor) -> np.ndarray:
    """按定义逐项求和的参照实现"""
    k, d = kernel.half_width, X.spatial
    out = np.zeros((kernel.out_channels, d, d))
    for p in range(1, kernel.out_channels + 1):
        for m in range(1, d + 1):
            for n in range(1, d + 1):
                total = 0.0
                for q in range(1, kernel.in_channels + 1):
                    for s in range(-k, k + 1):
                        for t in range(-k, k + 1):
                            total += kernel.entry(p, q, s, t) * zero_pad_lookup(X, q, m + s, n + t)
                out[p - 1, m - 1, n - 1] = total
    return out


class TestDataTensor:
    """数据张量测试类"""

    def test_values_are_read_only_copies(self):
        """构造时复制并冻结"""
        source = np.zeros((1, 3, 3))
        X = DataTensor(source)
        source[0, 0, 0] = 5.0
        assert X.entry(1, 1, 1) == 0.0
        with pytest.raises(ValueError):
            X.values[0, 0, 0] = 1.0

    def test_rejects_non_square(self):
        """只接受方形空间区域"""
        with pytest.raises(ShapeError):
            DataTensor(np.zeros((1, 2, 3)))
        with pytest.raises(ShapeError):
            DataTensor(np.zeros((2, 2)))

    def test_entry_out_of_range(self):
        """越界访问"""
        X = DataTensor.zeros(2, 3)
        with pytest.raises(IndexRangeError):
            X.entry(3, 1, 1)
        with pytest.raises(IndexRangeError):
            X.entry(1, 0, 1)

    def test_channel(self):
        """通道从 1 开始编号"""
        values = np.arange(18, dtype=float).reshape(2, 3, 3)
        X = DataTensor(values)
        np.testing.assert_array_equal(X.channel(2), values[1])
        with pytest.raises(IndexRangeError):
            X.channel(0)

    def test_vectorize_order(self):
        """vect 的位置为 (q−1)d²+(m−1)d+n"""
        values = np.arange(18, dtype=float).reshape(2, 3, 3)
        X = DataTensor(values)
        v = vectorize(X)
        assert v[(2 - 1) * 9 + (3 - 1) * 3 + 2 - 1] == X.entry(2, 3, 2)
        np.testing.assert_array_equal(devectorize(v, 2, 3).values, values)
        with pytest.raises(ShapeError):
            devectorize(v, 1, 3)


class TestZeroPad:
    """零填充测试类"""

    def test_lookup(self):
        """范围内取值，范围外为 0"""
        X = DataTensor.from_matrix(np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert zero_pad_lookup(X, 1, 2, 1) == 3.0
        assert zero_pad_lookup(X, 1, 0, 1) == 0.0
        assert zero_pad_lookup(X, 1, 3, 3) == 0.0
        assert zero_pad_lookup(X, 1, -5, 100) == 0.0


class TestConvKernel:
    """卷积核测试类"""

    def test_builder_accumulates(self):
        """同一条目多次 add 会累加"""
        kernel = KernelBuilder(1, 1, 1).add(1, 1, 0, 0, 0.5).add(1, 1, 0, 0, 0.25).build()
        assert kernel.nnz == 1
        assert kernel.entry(1, 1, 0, 0) == 0.75
        assert kernel.entry(1, 1, 1, 1) == 0.0

    def test_builder_rejects_bad_offsets(self):
        """偏移超出 ±k 或通道越界"""
        builder = KernelBuilder(2, 1, 1)
        with pytest.raises(IndexRangeError):
            builder.add(1, 1, 2, 0, 1.0)
        with pytest.raises(IndexRangeError):
            builder.add(3, 1, 0, 0, 1.0)

    def test_from_entries(self):
        kernel = ConvKernel.from_entries(1, 2, 1, [(1, 2, -1, 1, 2.0), (1, 1, 0, 0, 1.0)])
        assert kernel.nnz == 2
        assert kernel.spatial_size == 3
        assert kernel.entry(1, 2, -1, 1) == 2.0
        assert kernel.entry(1, 1, 1, 1) == 0.0

    def test_duplicate_entries_rejected(self):
        """支撑集中不允许重复"""
        with pytest.raises(ShapeError):
            ConvKernel(1, 1, 1, p=[0, 0], q=[0, 0], s=[0, 0], t=[1, 1], values=[1.0, 2.0])

    def test_dense_round_trip(self):
        """稠密形式与支撑掩码"""
        dense = make_generator(3).random((2, 3, 3, 3))
        kernel = ConvKernel.from_dense(dense)
        assert kernel.nnz == dense.size
        np.testing.assert_array_equal(kernel.to_dense(), dense)
        assert kernel.support_mask().all()

    def test_structural_zero_kept_in_support(self):
        """from_dense 中值为 0 的条目仍是自由参数"""
        kernel = ConvKernel.from_dense(np.zeros((1, 1, 3, 3)))
        assert kernel.nnz == 9

    def test_scaled(self):
        """α·K 保持支撑集"""
        kernel = KernelBuilder(1, 2, 1).add(1, 2, -1, 1, 2.0).build()
        scaled = kernel.scaled(-0.5)
        assert scaled.entry(1, 2, -1, 1) == -1.0
        assert scaled.nnz == kernel.nnz


class TestConv2d:
    """卷积测试类"""

    @pytest.fixture
    def rng(self):
        return make_generator(11)

    @pytest.mark.parametrize("seed, out_channels, in_channels, d, k", [
        (0, 1, 1, 1, 0),
        (1, 1, 1, 2, 2),
        (2, 2, 3, 4, 1),
        (3, 3, 2, 5, 2),
        (4, 1, 3, 6, 1),
        (5, 3, 3, 6, 2),
    ])
    def test_matches_definition(self, seed, out_channels, in_channels, d, k):
        """随机 (c, c′, d, k) 下与逐项求和的定义一致，稠密核与稀疏核都检查"""
        rng = make_generator(seed)
        dense = rng.normal(size=(out_channels, in_channels, 2 * k + 1, 2 * k + 1))
        keep = rng.random(dense.shape) < 0.5
        sparse = ConvKernel.from_entries(out_channels, in_channels, k, [
            (p + 1, q + 1, s - k, t - k, dense[p, q, s, t]) for p, q, s, t in zip(*np.nonzero(keep))
        ])
        X = DataTensor(rng.normal(size=(in_channels, d, d)))
        for kernel in (ConvKernel.from_dense(dense), sparse):
            np.testing.assert_allclose(conv2d(kernel, X).values, naive_conv(kernel, X), atol=1e-12)

    def test_linear_in_kernel_and_input(self, rng):
        """conv2d(αK, X) = α·conv2d(K, X)，conv2d(K, X+Y) = conv2d(K, X) + conv2d(K, Y)"""
        kernel = ConvKernel.from_dense(rng.normal(size=(2, 3, 5, 5)))
        other = ConvKernel.from_dense(rng.normal(size=(2, 3, 5, 5)))
        X = DataTensor(rng.normal(size=(3, 5, 5)))
        Y = DataTensor(rng.normal(size=(3, 5, 5)))
        alpha = -1.75
        np.testing.assert_allclose(
            conv2d(kernel.scaled(alpha), X).values, alpha * conv2d(kernel, X).values, atol=1e-12
        )
        np.testing.assert_allclose(
            conv2d(kernel, X + Y).values,
            conv2d(kernel, X).values + conv2d(kernel, Y).values,
            atol=1e-12,
        )
        summed = ConvKernel.from_dense(kernel.to_dense() + other.to_dense())
        np.testing.assert_allclose(
            conv2d(summed, X).values, conv2d(kernel, X).values + conv2d(other, X).values, atol=1e-12
        )

    def test_matches_scipy_correlate(self, rng):
        """单通道情形等于 scipy 的零填充互相关"""
        dense = rng.normal(size=(1, 1, 5, 5))
        kernel = ConvKernel.from_dense(dense)
        X = DataTensor(rng.normal(size=(1, 6, 6)))
        expected = correlate2d(X.values[0], dense[0, 0], mode='same', boundary='fill', fillvalue=0.0)
        np.testing.assert_allclose(conv2d(kernel, X).values[0], expected, atol=1e-12)

    def test_shift_block(self):
        """单个 1 在 (s, t) 处的核把特征图平移"""
        X = DataTensor(np.arange(1, 10, dtype=float).reshape(1, 3, 3))
        kernel = KernelBuilder(1, 1, 1).add(1, 1, 0, -1, 1.0).build()
        expected = np.array([[0.0, 1.0, 2.0], [0.0, 4.0, 5.0], [0.0, 7.0, 8.0]])
        np.testing.assert_array_equal(conv2d(kernel, X).values[0], expected)

    def test_batched(self, rng):
        """批量输入逐个等于单个卷积"""
        kernel = ConvKernel.from_dense(rng.normal(size=(2, 1, 3, 3)))
        batch = rng.random((5, 1, 4, 4))
        out = conv2d_array(kernel, batch)
        assert out.shape == (5, 2, 4, 4)
        for index in range(5):
            np.testing.assert_allclose(out[index], conv2d(kernel, DataTensor(batch[index])).values, atol=1e-14)

    def test_channel_mismatch(self):
        """输入通道数必须等于核的输入通道数"""
        kernel = KernelBuilder(1, 2, 1).add(1, 1, 0, 0, 1.0).build()
        with pytest.raises(ShapeError):
            conv2d(kernel, DataTensor.zeros(1, 3))

    def test_empty_support_gives_zero(self):
        """空支撑的核输出全零"""
        kernel = KernelBuilder(2, 1, 1).build()
        out = conv2d(kernel, DataTensor(np.ones((1, 3, 3))))
        assert out.channels == 2
        assert not out.values.any()

    def test_relu(self):
        """逐元素 max(x, 0)"""
        X = DataTensor(np.array([[[-1.0, 2.0], [0.0, -3.0]]]))
        np.testing.assert_array_equal(relu(X).values, [[[0.0, 2.0], [0.0, 0.0]]])

    def test_relu_idempotent(self, rng):
        """σ(σ(X)) = σ(X)，且输出非负"""
        X = DataTensor(rng.normal(size=(3, 5, 5)))
        once = relu(X)
        np.testing.assert_array_equal(relu(once).values, once.values)
        assert (once.values >= 0).all()


class TestBiasVector:
    """偏置测试类"""

    def test_support_defaults_to_free(self):
        """缺省全部为自由参数"""
        assert BiasVector(np.zeros(3)).nnz == 3

    def test_structural(self):
        """只有非零条目计入规模"""
        bias = BiasVector.structural([0.0, -0.5, 0.0, -1.0])
        assert bias.nnz == 2
        assert BiasVector.zeros(4).nnz == 0

    def test_structural_zero_must_be_zero(self):
        """结构零位置上不允许非零值"""
        with pytest.raises(ShapeError):
            BiasVector(np.array([1.0, 0.0]), np.array([False, False]))
