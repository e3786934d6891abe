#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Korobov CNN 构造与验证工具 - 主程序
显式构造逼近 Korobov 函数的二维 ReLU 卷积网络，并逐项验证误差界与结构恒等式
"""

import argparse
import logging
import math
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

# 设置环境变量解决Windows下的编码问题
os.environ['PYTHONIOENCODING'] = 'utf-8'

# 添加项目路径
sys.path.append(str(Path(__file__).parent))

from utils.cli_interface import FriendlyCLI
from utils.error_handler import (
    EXIT_OK,
    EXIT_USAGE,
    BoundViolationError,
    InvalidParameterError,
    error_handler,
    handle_error,
)
from utils.file_utils import FileUtils, load_config
from utils.logger import setup_logger_from_config
from utils.network_io import NetworkFile, export_network
from utils.performance import BatchEvaluator, Stopwatch, performance_monitor, resolve_max_threads
from utils.sampling import PRNG_NAME

from processors.approximator import (
    architecture_for_N,
    build_approximator,
    check_size_bound,
    select_N,
)
from processors.basis_network import build_basis_net, build_phi_net
from processors.product_network import build_product_net
from processors.scalar_networks import build_prd_net, build_sq_net
from processors.sparse_grid import LevelIndex
from processors.targets import available_targets, get_target
from processors.verification import SUITES, VerificationReport, VerificationSuite

BUILD_KINDS = ("sq", "prd", "product", "phi", "basis", "approximator")
SWEEP_KINDS = ("sq", "prd", "product", "basis", "e2e")

ANCHORS = {
    "sq": "sq_n：x² 在 2^n+1 个断点上的分段线性插值，宽 4c、深 2(n+1)",
    "prd": "prd_n(x,y) = 2(sq_n((x+y)/2) − sq_n(x/2) − sq_n(y/2))，宽 12",
    "product": "Π̃_n：先列后行两两 prd_n 归约，(d,d) 处输出全部元素之积",
    "phi": "Φ_{l,i}：逐元素帽函数，经选择网络对齐后合并到一个通道",
    "basis": "g_{l,i} = Π̃_n ∘ Φ_{l,i}，(d,d) 处逼近 φ_{l,i}(vect(X))",
    "approximator": "h_n = Σ v_{l,i}[g_{l,i}]_{d,d}，宽 2θ_n d²、深 2(2n+3)log₂d+6d",
}


def parse_level_index(text: str, dimension: int) -> LevelIndex:
    """
    解析 "l1,l2,...:i1,i2,..." 形式的层级索引，缺省项补 1

    Args:
        text: 命令行字符串
        dimension: 维数 D = d²

    Returns:
        LevelIndex
    """
    try:
        levels, positions = text.split(":")
        l = [int(v) for v in levels.split(",") if v.strip()]
        i = [int(v) for v in positions.split(",") if v.strip()]
    except ValueError as exc:
        raise InvalidParameterError(f"无法解析层级索引 {text!r}，格式应为 l1,l2,...:i1,i2,...") from exc
    if len(l) != len(i) or len(l) > dimension:
        raise InvalidParameterError(f"层级索引 {text!r} 的 l 与 i 长度须相同且不超过 {dimension}")
    padding = [1] * (dimension - len(l))
    return LevelIndex(tuple(l + padding), tuple(i + padding))


class KorobovHarness:
    """构造、验证、扫描与导出的统一入口"""

    def __init__(self, config_path: str = "config.yaml", log_level: Optional[str] = None):
        """
        初始化

        Args:
            config_path: 配置文件路径(不存在时使用默认配置)
            log_level: 覆盖配置中的日志级别
        """
        self.config = load_config(config_path)
        self.logger = setup_logger_from_config(self.config, log_level)
        self.cli = FriendlyCLI()

        performance = self.config.get('performance', {})
        self.evaluator = BatchEvaluator(
            max_threads=resolve_max_threads(self.config),
            batch_size=int(performance.get('batch_size', 64)),
        )
        self.suite = VerificationSuite(self.config, self.evaluator)
        self.size_report = None

    @property
    def dense_limit(self) -> int:
        return int(self.config.get('output', {}).get('dense_kernel_limit', 4096))

    def build(self, kind: str, args: argparse.Namespace) -> NetworkFile:
        """
        按种类构造网络并封装成 NetworkFile

        Args:
            kind: sq, prd, product, phi, basis, approximator
            args: 命令行参数

        Returns:
            NetworkFile
        """
        d, k, n = args.d, args.k, args.n
        parameters: Dict[str, Any] = {"d": d, "k": k}
        readout = None
        self.size_report = None

        if kind == "sq":
            parameters.update(n=n, c=args.c)
            net = build_sq_net(n, args.c, d, k).net
        elif kind == "prd":
            parameters.update(n=n)
            net = build_prd_net(n, d, k)
        elif kind == "product":
            parameters.update(n=n)
            net = build_product_net(n, d, k).net
        elif kind in ("phi", "basis"):
            li = parse_level_index(args.index, d * d) if args.index else LevelIndex.ones(d * d)
            parameters.update(l=list(li.l), i=list(li.i))
            if kind == "phi":
                net = build_phi_net(li, d, k)
            else:
                parameters.update(n=n)
                net = build_basis_net(li, n, d, k).net
        elif kind == "approximator":
            target = get_target(args.target, d * d, n)
            app = build_approximator(target.expansion, n, d, k, index_set=args.index_set)
            parameters.update(n=n, target=args.target, index_set=args.index_set, theta=app.theta)
            net, readout = app.h.net, app.h
            self.size_report = check_size_bound(app, args.N)
        else:
            raise InvalidParameterError(f"未知构造种类 {kind}，可选: {', '.join(BUILD_KINDS)}")

        network_file = NetworkFile.create(net, kind, parameters, ANCHORS[kind], readout, self.dense_limit)
        self.logger.info(f"构造完成 {kind}: 深度 {net.depth}, 宽度 {net.width}, 规模 {network_file.metadata['size']}")
        return network_file

    def verify(self, suite: str, args: argparse.Namespace) -> VerificationReport:
        """运行验证套件，命令行参数覆盖配置"""
        params = {
            "d": args.d,
            "d_max": args.d_max,
            "k": args.k,
            "n": args.n,
            "n_max": args.n_max,
            "c": args.c,
            "samples": args.samples,
            "seed": args.seed,
            "target": args.target,
            "p": args.p,
            "N": args.N,
        }
        if args.epsilon is not None:
            params["epsilons"] = [args.epsilon]
        return self.suite.run(suite, **params)

    def select(self, args: argparse.Namespace) -> Dict[str, Any]:
        """给定 ε 选取 N，并给出对应的结构参数"""
        if args.epsilon is None:
            raise InvalidParameterError("select 需要 --epsilon")
        p = math.inf if args.p is None else args.p
        N = select_N(args.epsilon, p, args.d)
        summary = architecture_for_N(N, args.d)
        return {
            "ε": args.epsilon,
            "p": p,
            "log₂N": f"{math.log2(N):.2f}",
            "τ_N": summary.n,
            "宽度上界 log₂": f"{math.log2(summary.width_bound):.2f}",
            "深度上界": summary.depth_bound,
        }

    def size_summary(self) -> Optional[Dict[str, Any]]:
        """最近一次构造的逼近器的规模检查摘要"""
        size_report = self.size_report
        if size_report is None:
            return None
        return {
            "规模": size_report.size,
            "N": size_report.N,
            "判定形式": size_report.regime,
            "规模上界": f"{size_report.bound:.3e}" if size_report.regime == "N" else f"{size_report.n_form_bound:.3e}",
            "结果": "通过" if size_report.passed else "超界",
        }


def build_parser() -> argparse.ArgumentParser:
    """命令行参数定义"""
    parser = argparse.ArgumentParser(description='Korobov CNN 构造与验证工具')
    parser.add_argument('-c', '--config', default='config.yaml', help='配置文件路径')
    parser.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], help='日志级别')
    subparsers = parser.add_subparsers(dest='command', required=True)

    def add_common(sub: argparse.ArgumentParser, n_default: Optional[int] = 2):
        sub.add_argument('--d', type=int, default=4, help='空间尺寸 d')
        sub.add_argument('--k', type=int, default=1, help='卷积核半宽 k')
        sub.add_argument('--n', type=int, default=n_default, help='层级 n')
        sub.add_argument('--c', type=int, default=1, help='sq 网络的通道数')
        sub.add_argument('--target', default='hat111', choices=available_targets(), help='目标函数')
        sub.add_argument('--index', help='层级索引 l1,l2,...:i1,i2,... (phi/basis)')
        sub.add_argument('--index-set', default='full', choices=['full', 'expansion'], help='逼近器的索引模式')
        sub.add_argument('--N', type=int, help='规模参数 N (缺省为 θ_n)')

    build = subparsers.add_parser('build', help='构造网络并写出 NetworkFile')
    build.add_argument('kind', choices=BUILD_KINDS)
    add_common(build)
    build.add_argument('--out', help='输出文件路径')
    build.add_argument('--format', choices=['json', 'csv'], default='json', help='输出格式')

    verify = subparsers.add_parser('verify', help='运行验证套件')
    verify.add_argument('suite', choices=SUITES)
    add_common(verify, n_default=None)
    verify.add_argument('--d-max', type=int, help='selector 套件的最大 d')
    verify.add_argument('--n-max', type=int, help='最大层级')
    verify.add_argument('--p', type=float, help='范数指数 (缺省 ∞)')
    verify.add_argument('--epsilon', type=float, help='目标精度 ε')
    verify.add_argument('--samples', type=int, help='随机样本数')
    verify.add_argument('--seed', type=int, help='随机种子')
    verify.add_argument('--out', help='报告 JSON 输出路径')

    sweep = subparsers.add_parser('sweep', help='按 n 扫描误差并写出 CSV')
    sweep.add_argument('kind', choices=SWEEP_KINDS)
    add_common(sweep)
    sweep.add_argument('--n-min', type=int, help='最小层级')
    sweep.add_argument('--n-max', type=int, help='最大层级')
    sweep.add_argument('--samples', type=int, help='随机样本数')
    sweep.add_argument('--seed', type=int, help='随机种子')
    sweep.add_argument('--sampling', choices=['uniform', 'pairs'], help='采样方式')
    sweep.add_argument('--out', required=True, help='CSV 输出路径')

    export = subparsers.add_parser('export', help='把已保存的 NetworkFile 导出为 json 或 csv')
    export.add_argument('input', help='NetworkFile 路径')
    export.add_argument('--out', required=True, help='输出路径')
    export.add_argument('--format', choices=['json', 'csv'], default='csv', help='输出格式')

    select = subparsers.add_parser('select', help='给定精度 ε 选取 N')
    select.add_argument('--d', type=int, default=3, help='空间尺寸 d')
    select.add_argument('--p', type=float, help='范数指数 (缺省 ∞)')
    select.add_argument('--epsilon', type=float, required=True, help='目标精度 ε')

    return parser


def run_command(harness: KorobovHarness, args: argparse.Namespace) -> int:
    """执行子命令并返回退出码，超出理论界时抛出 BoundViolationError"""
    cli = harness.cli

    if args.command == 'build':
        network_file = harness.build(args.kind, args)
        metadata = network_file.metadata
        cli.show_summary(f"构造 {args.kind}", {
            "d": metadata["d"],
            "k": metadata["k"],
            "深度": metadata["depth"],
            "宽度": metadata["width"],
            "规模": metadata["size"],
        })
        size_summary = harness.size_summary()
        if size_summary:
            cli.show_summary("规模检查", size_summary)
            if size_summary["判定形式"] == "n":
                cli.print_warning("log₂N < n，N 形式的规模界不适用，已改用 n 形式判定")
        if args.out:
            path = export_network(network_file, args.out, args.format)
            cli.print_success(f"已写出 {path}")
        if size_summary and size_summary["结果"] != "通过":
            raise BoundViolationError(
                f"规模 {size_summary['规模']} 超出上界 {size_summary['规模上界']}",
                regime=size_summary["判定形式"],
            )
        return EXIT_OK

    if args.command == 'verify':
        report = harness.verify(args.suite, args)
        cli.print_section(f"验证套件 {report.suite}", f"随机数生成器 {PRNG_NAME}")
        cli.print_table(report.rows())
        violations = [
            BoundViolationError(
                f"{failure.name}: 种子 {failure.seed}, 实测 {failure.measured:.6e}, 上界 {failure.bound:.6e}",
                seed=failure.seed,
            )
            for failure in report.failures
        ]
        if args.out:
            payload = report.to_dict()
            payload["error_report"] = error_handler.create_error_report([
                error_handler.handle_exception(violation, f"验证套件 {report.suite}")
                for violation in violations
            ])
            FileUtils.save_json(payload, args.out)
        if not violations:
            cli.print_success(f"全部 {len(report.checks)} 项检查通过")
            return EXIT_OK
        for violation in violations:
            cli.print_error(violation.message)
        raise BoundViolationError(f"{len(violations)} 项检查超出上界", suite=report.suite)

    if args.command == 'sweep':
        from batch_process import SweepRunner
        runner = SweepRunner(harness.config, harness.evaluator)
        frame = runner.run(
            kind=args.kind,
            d=args.d,
            k=args.k,
            n_min=args.n_min,
            n_max=args.n_max,
            samples=args.samples,
            seed=args.seed,
            sampling=args.sampling,
            target=args.target,
            out_csv=args.out,
        )
        cli.print_table(frame.to_dict("records"))
        violations = runner.violations(frame)
        if violations:
            raise BoundViolationError(f"{violations} 行的实测误差超过上界", csv=args.out)
        cli.print_success(f"已写出 {args.out}")
        return EXIT_OK

    if args.command == 'export':
        network_file = NetworkFile.load(args.input)
        path = export_network(network_file, args.out, args.format)
        cli.print_success(f"已导出 {path}")
        return EXIT_OK

    if args.command == 'select':
        cli.show_summary("N 的选取", harness.select(args))
        return EXIT_OK

    raise InvalidParameterError(f"未知子命令 {args.command}")


def main(argv: Optional[List[str]] = None) -> int:
    """主函数"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE

    try:
        harness = KorobovHarness(args.config, args.log_level)
        with Stopwatch().measure() as watch:
            exit_code = run_command(harness, args)
        harness.logger.info(f"命令 {args.command} 完成, 耗时 {watch.elapsed_ms:.0f} ms, 退出码 {exit_code}")
        if harness.logger.isEnabledFor(logging.DEBUG):
            performance_monitor.print_performance_report()
        return exit_code
    except KeyboardInterrupt:
        print("\n用户中断", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        error_info = handle_error(e, f"执行 {args.command}", print_error=False)
        print(error_handler.format_error_message(error_info), file=sys.stderr)
        return error_handler.exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
