#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
平移块与选择网络单元测试
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# 添加项目路径
sys.path.append(str(Path(__file__).parent.parent))

from processors.shift_ops import (
    IDENTITY,
    ShiftBlock,
    apply_plan,
    build_selector,
    mask_oracle,
    max_selector_length,
    selector_net,
    shift_apply,
)
from processors.tensor_core import DataTensor
from utils.error_handler import IndexRangeError, ShapeError
from utils.sampling import make_generator


class TestShiftBlock:
    """平移块测试类"""

    @pytest.fixture
    def X(self):
        return DataTensor(np.arange(1, 17, dtype=float).reshape(1, 4, 4))

    def test_identity(self, X):
        """S^{0,0} 不改变输入"""
        np.testing.assert_array_equal(shift_apply(IDENTITY, X).values, X.values)

    def test_shift_reads_offset(self, X):
        """[S^{s,t}∗X]_{m,n} = [ι(X)]_{m+s,n+t}"""
        out = shift_apply(ShiftBlock(1, -1), X).values[0]
        expected = np.zeros((4, 4))
        expected[:3, 1:] = X.values[0, 1:, :3]
        np.testing.assert_array_equal(out, expected)

    def test_kernel_range(self):
        """偏移不能超过核半宽"""
        with pytest.raises(IndexRangeError):
            ShiftBlock(2, 0).kernel(1)
        assert ShiftBlock(2, 0).kernel(2).nnz == 1

    def test_multichannel_rejected(self):
        """只作用于单通道"""
        with pytest.raises(ShapeError):
            shift_apply(IDENTITY, DataTensor.zeros(2, 3))

    def test_reflection(self):
        """行镜像"""
        assert ShiftBlock(1, -1).reflected_rows() == ShiftBlock(-1, -1)
        assert str(ShiftBlock(0, 1)) == "S^{0,1}"


class TestSelector:
    """选择序列测试类"""

    @pytest.mark.parametrize("d", range(3, 9))
    def test_length_bound(self, d):
        """所有 (m, n) 的序列长度 ≤ ⌊5d/2⌋ − 1"""
        limit = max_selector_length(d)
        for m in range(1, d + 1):
            for n in range(1, d + 1):
                plan = build_selector(m, n, d)
                assert plan.length <= limit
                assert plan.max_length == limit

    @pytest.mark.parametrize("d", range(3, 9))
    def test_masking_exact(self, d):
        """平移序列的结果精确等于掩码"""
        inputs = make_generator(d).random((3, 1, d, d))
        for m in range(1, d + 1):
            for n in range(1, d + 1):
                plan = build_selector(m, n, d)
                for x in inputs:
                    X = DataTensor(x)
                    np.testing.assert_array_equal(apply_plan(plan, X).values, mask_oracle(X, m, n).values)

    def test_larger_half_width(self):
        """k > 1 时同样成立"""
        X = DataTensor(make_generator(1).random((1, 5, 5)))
        plan = build_selector(4, 2, 5, k=2)
        assert plan.half_width == 2
        np.testing.assert_array_equal(apply_plan(plan, X).values, mask_oracle(X, 4, 2).values)

    def test_known_plan(self):
        """d = 3 时 Δ_{1,1} 为 S^{-1,-1}×2 后接 S^{1,1}×2"""
        plan = build_selector(1, 1, 3)
        assert [str(block) for block in plan.blocks] == ["S^{-1,-1}", "S^{-1,-1}", "S^{1,1}", "S^{1,1}"]

    def test_out_of_range(self):
        """坐标与核半宽检查"""
        with pytest.raises(IndexRangeError):
            build_selector(0, 1, 4)
        with pytest.raises(IndexRangeError):
            build_selector(1, 5, 4)
        with pytest.raises(ShapeError):
            build_selector(1, 1, 4, k=0)

    def test_network(self):
        """选择网络：非负输入上等于掩码，补齐深度后不变"""
        d = 5
        inputs = make_generator(2).random((4, 1, d, d))
        for m, n in [(1, 1), (2, 5), (5, 1), (3, 3), (4, 4)]:
            net = selector_net(m, n, d)
            padded = selector_net(m, n, d, 1, max_selector_length(d))
            assert padded.depth == max_selector_length(d)
            expected = np.zeros_like(inputs)
            expected[:, :, m - 1, n - 1] = inputs[:, :, m - 1, n - 1]
            np.testing.assert_array_equal(net.forward_array(inputs), expected)
            np.testing.assert_array_equal(padded.forward_array(inputs), expected)
            assert net.size == net.depth
