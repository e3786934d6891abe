#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
目标函数库单元测试
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# 添加项目路径
sys.path.append(str(Path(__file__).parent.parent))

from processors.sparse_grid import LevelIndex, eval_truncation
from processors.targets import available_targets, get_target
from utils.error_handler import InvalidParameterError
from utils.sampling import make_generator


class TestTargets:
    """目标函数测试类"""

    def test_available(self):
        """目标名称列表"""
        assert available_targets() == ["hat-offset", "hat-pair", "hat111", "parabola"]

    @pytest.mark.parametrize("name", ["hat111", "hat-offset", "hat-pair"])
    def test_exact_targets(self, name):
        """可精确表示的目标：展开与函数相同"""
        target = get_target(name, 16, 2)
        assert target.exact
        x = make_generator(3).random((200, 16))
        np.testing.assert_array_equal(target.function(x), eval_truncation(target.expansion, x))

    def test_hat_pair_variation(self):
        """hat-pair 的 Σ|v| = 1.5"""
        target = get_target("hat-pair", 16, 3)
        assert target.expansion.total_variation == 1.5
        assert target.expansion.indices[0] == LevelIndex.ones(16)

    def test_offset_requires_budget(self):
        """hat-offset 需要 n ≥ 2"""
        with pytest.raises(InvalidParameterError):
            get_target("hat-offset", 16, 1)

    def test_parabola_truncation(self):
        """抛物线的截断展开逼近原函数，n 增大误差减小"""
        x = make_generator(4).random((300, 4))
        errors = []
        for n in (1, 2, 3):
            target = get_target("parabola", 4, n)
            assert not target.exact
            errors.append(np.abs(target.function(x) - eval_truncation(target.expansion, x)).max())
        assert errors[0] > errors[1] > errors[2]

    def test_unknown(self):
        """未知名称"""
        with pytest.raises(InvalidParameterError):
            get_target("gaussian", 4, 2)
