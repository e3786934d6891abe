#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
性能工具模块
提供耗时统计、批量并发评估以及线程上限配置
"""

import functools
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from typing import Any, Callable, Dict, Iterator, List, Optional

import numpy as np
from dotenv import load_dotenv

from .logger import LoggerMixin, get_logger

logger = get_logger(__name__)

THREADS_ENV = "KOROBOV_CNN_THREADS"


def resolve_max_threads(config: Optional[Dict[str, Any]] = None) -> int:
    """
    解析评估并发上限

    环境变量 KOROBOV_CNN_THREADS (可写在 .env 中) 优先于配置文件。

    Args:
        config: 完整配置字典

    Returns:
        线程数上限(至少为 1)
    """
    load_dotenv()
    env_value = os.getenv(THREADS_ENV)
    if env_value:
        try:
            return max(1, int(env_value))
        except ValueError:
            logger.warning(f"忽略无效的环境变量 {THREADS_ENV}={env_value!r}，改用配置中的线程数")
    configured = (config or {}).get('performance', {}).get('max_threads', 1)
    return max(1, int(configured))


class PerformanceMonitor(LoggerMixin):
    """性能监控器"""

    def __init__(self):
        self.metrics: Dict[str, Dict[str, float]] = {}
        self._lock = threading.Lock()

    def record_timing(self, operation: str, duration: float):
        """记录操作耗时"""
        with self._lock:
            if operation not in self.metrics:
                self.metrics[operation] = {
                    'count': 0,
                    'total_time': 0.0,
                    'min_time': float('inf'),
                    'max_time': 0.0
                }

            metric = self.metrics[operation]
            metric['count'] += 1
            metric['total_time'] += duration
            metric['min_time'] = min(metric['min_time'], duration)
            metric['max_time'] = max(metric['max_time'], duration)

    def get_performance_summary(self) -> Dict[str, Any]:
        """获取性能汇总"""
        with self._lock:
            summary = {}
            for operation, metric in self.metrics.items():
                if metric['count'] > 0:
                    summary[operation] = {
                        'count': metric['count'],
                        'avg_time': metric['total_time'] / metric['count'],
                        'min_time': metric['min_time'],
                        'max_time': metric['max_time'],
                        'total_time': metric['total_time']
                    }
            return summary

    def print_performance_report(self):
        """打印性能报告"""
        summary = self.get_performance_summary()

        if not summary:
            self.logger.info("暂无性能数据")
            return

        self.logger.info("=== 性能报告 ===")
        for operation, stats in summary.items():
            self.logger.info(
                f"{operation}: "
                f"执行{stats['count']}次, "
                f"平均{stats['avg_time']:.3f}s, "
                f"范围[{stats['min_time']:.3f}s - {stats['max_time']:.3f}s]"
            )


def timing_decorator(monitor: PerformanceMonitor):
    """性能监控装饰器"""
    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            try:
                return func(*args, **kwargs)
            finally:
                monitor.record_timing(func.__name__, time.perf_counter() - start_time)

        return wrapper
    return decorator


class Stopwatch:
    """计时器，elapsed_ms 在 with 块结束后可读"""

    def __init__(self):
        self.elapsed_ms = 0.0

    @contextmanager
    def measure(self) -> Iterator["Stopwatch"]:
        start = time.perf_counter()
        try:
            yield self
        finally:
            self.elapsed_ms = (time.perf_counter() - start) * 1000.0


class BatchEvaluator(LoggerMixin):
    """
    批量评估器

    把样本沿第 0 轴切成批次，在线程池中并发调用同一个纯函数，
    结果按原顺序拼接。被调用对象必须是不可变的。
    """

    def __init__(self, max_threads: int = 1, batch_size: int = 64):
        """
        Args:
            max_threads: 线程数上限
            batch_size: 每批样本数
        """
        self.max_threads = max(1, int(max_threads))
        self.batch_size = max(1, int(batch_size))

    def map(self, func: Callable[[np.ndarray], np.ndarray], samples: np.ndarray) -> np.ndarray:
        """
        分批评估

        Args:
            func: 作用在一批样本上的函数，返回与批次等长的数组
            samples: 形如 (N, ...) 的样本数组

        Returns:
            形如 (N, ...) 的结果
        """
        if len(samples) == 0:
            return np.asarray(func(samples))

        batches: List[np.ndarray] = [
            samples[start:start + self.batch_size]
            for start in range(0, len(samples), self.batch_size)
        ]
        if self.max_threads == 1 or len(batches) == 1:
            results = [func(batch) for batch in batches]
        else:
            with ThreadPoolExecutor(max_workers=self.max_threads) as pool:
                results = list(pool.map(func, batches))

        self.logger.debug(f"批量评估完成: {len(samples)} 个样本, {len(batches)} 批, {self.max_threads} 线程")
        return np.concatenate(results, axis=0)


# 全局性能监控实例
performance_monitor = PerformanceMonitor()
