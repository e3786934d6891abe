#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
批量扫描脚本
对一段层级 n 逐个构造网络、测量误差，写出带固定表头的 CSV
"""

import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import pandas as pd
from tqdm import tqdm

# 添加项目路径
sys.path.append(str(Path(__file__).parent))

from utils.error_handler import InvalidParameterError
from utils.file_utils import FileUtils
from utils.logger import LoggerMixin
from utils.performance import BatchEvaluator, Stopwatch, performance_monitor

from processors.verification import (
    Measurement,
    measure_basis,
    measure_e2e,
    measure_prd,
    measure_product,
    measure_sq,
)

SWEEP_COLUMNS = ["n", "d", "k", "bound", "measured_error", "samples", "seed", "wall_time_ms"]


class SweepRunner(LoggerMixin):
    """按层级扫描误差的批处理器"""

    def __init__(self, config: Optional[Dict[str, Any]] = None, evaluator: Optional[BatchEvaluator] = None):
        """
        初始化

        Args:
            config: 完整配置字典
            evaluator: 批量评估器
        """
        config = config or {}
        self.verification = config.get('verification', {})
        self.defaults = config.get('sweep', {})
        self.evaluator = evaluator

    def _measure(self, kind: str, n: int, d: int, k: int, samples: int, seed: int,
                 sampling: str, target: str) -> Measurement:
        measures: Dict[str, Callable[[], Measurement]] = {
            "sq": lambda: measure_sq(n, 1, d, k, samples, seed, self.evaluator),
            "prd": lambda: measure_prd(n, d, k, samples, seed, self.evaluator),
            "product": lambda: measure_product(n, d, k, samples, seed, sampling, self.evaluator),
            "basis": lambda: measure_basis(n, d, k, samples, seed, sampling=sampling, evaluator=self.evaluator),
            "e2e": lambda: measure_e2e(n, d, k, samples, seed, target, sampling, evaluator=self.evaluator),
        }
        if kind not in measures:
            raise InvalidParameterError(f"未知扫描种类 {kind}，可选: {', '.join(sorted(measures))}")
        return measures[kind]()

    def run(
        self,
        kind: str,
        d: int = 4,
        k: int = 1,
        n_min: Optional[int] = None,
        n_max: Optional[int] = None,
        samples: Optional[int] = None,
        seed: Optional[int] = None,
        sampling: Optional[str] = None,
        target: str = "hat111",
        out_csv: Optional[str] = None
    ) -> pd.DataFrame:
        """
        扫描 n = n_min..n_max

        Args:
            kind: sq, prd, product, basis, e2e
            d: 空间尺寸
            k: 核半宽
            n_min: 最小层级
            n_max: 最大层级
            samples: 每个 n 的随机样本数
            seed: 随机种子(每个 n 使用同一种子)
            sampling: uniform 或 pairs
            target: e2e 的目标函数
            out_csv: CSV 输出路径，为 None 时不写文件

        Returns:
            每个 n 一行的 DataFrame，列为 SWEEP_COLUMNS
        """
        n_min = int(self.defaults.get('n_min', 1) if n_min is None else n_min)
        n_max = int(self.defaults.get('n_max', 6) if n_max is None else n_max)
        samples = int(self.verification.get('samples', 500) if samples is None else samples)
        seed = int(self.verification.get('seed', 7) if seed is None else seed)
        sampling = sampling or self.verification.get('sampling', 'pairs')

        if n_min > n_max:
            raise InvalidParameterError(f"扫描区间为空: n_min={n_min} > n_max={n_max}")

        self.logger.info(f"开始扫描 {kind}: d={d}, k={k}, n={n_min}..{n_max}, 样本 {samples}, 种子 {seed}")
        rows: List[Dict[str, Any]] = []
        for n in tqdm(range(n_min, n_max + 1), desc=f"扫描 {kind}", unit="n", file=sys.stderr):
            with Stopwatch().measure() as watch:
                measurement = self._measure(kind, n, d, k, samples, seed, sampling, target)
            performance_monitor.record_timing(f"sweep_{kind}", watch.elapsed_ms / 1000.0)
            rows.append({
                "n": n,
                "d": d,
                "k": k,
                "bound": measurement.bound,
                "measured_error": measurement.measured,
                "samples": measurement.samples,
                "seed": seed,
                "wall_time_ms": round(watch.elapsed_ms, 3),
            })
            self.logger.debug(f"n={n}: 误差 {measurement.measured:.3e} / 上界 {measurement.bound:.3e}")

        frame = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
        if out_csv:
            self.write_csv(frame, out_csv)
        return frame

    def write_csv(self, frame: pd.DataFrame, out_csv: str) -> Path:
        """写出 CSV，浮点数用 repr 精度，行尾统一为 \\n"""
        path = Path(out_csv)
        FileUtils.ensure_dir(path.parent)
        frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
        self.logger.info(f"扫描结果已写出: {path} ({len(frame)} 行)")
        return path

    @staticmethod
    def violations(frame: pd.DataFrame) -> int:
        """实测误差超过上界的行数"""
        return int((frame["measured_error"] > frame["bound"]).sum())


def main():
    """独立运行入口，等价于 main.py sweep"""
    import argparse

    from utils.file_utils import load_config
    from utils.logger import setup_logger_from_config
    from utils.performance import resolve_max_threads

    parser = argparse.ArgumentParser(description='按层级 n 扫描构造误差')
    parser.add_argument('kind', choices=['sq', 'prd', 'product', 'basis', 'e2e'])
    parser.add_argument('--d', type=int, default=4, help='空间尺寸')
    parser.add_argument('--k', type=int, default=1, help='核半宽')
    parser.add_argument('--n-min', type=int, help='最小层级')
    parser.add_argument('--n-max', type=int, help='最大层级')
    parser.add_argument('--samples', type=int, help='样本数')
    parser.add_argument('--seed', type=int, help='随机种子')
    parser.add_argument('--sampling', choices=['uniform', 'pairs'], help='采样方式')
    parser.add_argument('--target', default='hat111', help='e2e 目标函数')
    parser.add_argument('--out', required=True, help='CSV 输出路径')
    parser.add_argument('-c', '--config', default='config.yaml', help='配置文件路径')
    args = parser.parse_args()

    config = load_config(args.config)
    setup_logger_from_config(config)
    evaluator = BatchEvaluator(resolve_max_threads(config), config['performance'].get('batch_size', 64))
    runner = SweepRunner(config, evaluator)
    frame = runner.run(args.kind, args.d, args.k, args.n_min, args.n_max, args.samples,
                       args.seed, args.sampling, args.target, args.out)
    return 1 if runner.violations(frame) else 0


if __name__ == "__main__":
    sys.exit(main())
