#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
采样工具模块
固定的带种子随机数生成器与验证用的各类输入点
"""

from typing import Sequence

import numpy as np

# 输出文件中记录的生成器名称；同一种子在任何实现中都应给出同一序列
PRNG_NAME = "numpy.PCG64/v1"


def make_generator(seed: int) -> np.random.Generator:
    """以 PCG64 为位生成器的 numpy Generator"""
    return np.random.Generator(np.random.PCG64(int(seed)))


def uniform_points(rng: np.random.Generator, count: int, dimension: int) -> np.ndarray:
    """[0,1]^D 中的均匀点，形如 (count, D)"""
    return rng.random((count, dimension))


def uniform_tensors(rng: np.random.Generator, count: int, channels: int, spatial: int) -> np.ndarray:
    """[0,1]^{c×d×d} 中的均匀张量，形如 (count, c, d, d)"""
    return rng.random((count, channels, spatial, spatial))


def points_to_tensors(points: np.ndarray, spatial: int) -> np.ndarray:
    """(N, d²) 的点按 vect 顺序排成 (N, 1, d, d) 的单通道张量"""
    points = np.asarray(points, dtype=np.float64)
    return points.reshape(points.shape[0], 1, spatial, spatial)


def grid_points(indices: Sequence) -> np.ndarray:
    """各层级索引的网格点 x_{l,i}，形如 (len, D)"""
    return np.stack([li.grid_point for li in indices])


def axis_midpoints(indices: Sequence) -> np.ndarray:
    """网格点沿每个坐标轴偏移 ±h/2 的点，形如 (2·D·len, D)"""
    blocks = []
    for li in indices:
        center, width = li.grid_point, li.mesh_widths
        dimension = len(center)
        for sign in (-0.5, 0.5):
            shifted = np.tile(center, (dimension, 1))
            shifted[np.arange(dimension), np.arange(dimension)] += sign * width
            blocks.append(shifted)
    return np.concatenate(blocks, axis=0)


def pair_points(rng: np.random.Generator, count: int, indices: Sequence) -> np.ndarray:
    """
    成对扰动点：随机取一个层级索引的网格点，再把两个随机坐标
    重新均匀采样到该索引的支撑区间内

    Args:
        rng: 随机数生成器
        count: 点数
        indices: 层级索引序列

    Returns:
        形如 (count, D) 的点
    """
    centers = np.stack([li.grid_point for li in indices])
    widths = np.stack([li.mesh_widths for li in indices])
    dimension = centers.shape[1]

    chosen = rng.integers(0, len(indices), size=count)
    points = centers[chosen].copy()
    axes = rng.random((count, dimension)).argsort(axis=1)[:, :2]
    rows = np.arange(count)[:, np.newaxis]
    offsets = rng.uniform(-1.0, 1.0, size=(count, 2))
    points[rows, axes] = centers[chosen][rows, axes] + offsets * widths[chosen][rows, axes]
    return np.clip(points, 0.0, 1.0)


def product_pair_tensors(rng: np.random.Generator, count: int, spatial: int) -> np.ndarray:
    """
    乘积网络的成对扰动输入：全 1 矩阵中某一行的第 2j−1、2j 列取均匀随机值

    Returns:
        形如 (count, 1, d, d) 的张量
    """
    tensors = np.ones((count, 1, spatial, spatial))
    rows = rng.integers(0, spatial, size=count)
    pairs = rng.integers(0, spatial // 2, size=count)
    values = rng.random((count, 2))
    index = np.arange(count)
    tensors[index, 0, rows, 2 * pairs] = values[:, 0]
    tensors[index, 0, rows, 2 * pairs + 1] = values[:, 1]
    return tensors
