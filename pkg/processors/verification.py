#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
验证模块
各构造的不变量检查套件：数值解等价、误差界、结构恒等式与收敛速率
"""

import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import integrate

sys.path.append(str(Path(__file__).parent.parent))

from processors.approximator import (
    approximator_depth,
    build_approximator,
    check_size_bound,
    e2e_error_bound,
    measure_error,
    select_N,
    selection_beta,
    error_bound_for_N_log2,
)
from processors.basis_network import (
    basis_depth,
    basis_error_bound,
    build_basis_net,
    build_phi_net,
    phi_depth,
)
from processors.product_network import (
    build_product_net,
    column_reduction_oracle,
    product_depth,
    product_error_bound,
    reduction_oracle,
)
from processors.scalar_networks import (
    build_prd_net,
    build_sq_net,
    g_iterate,
    prd_oracle,
    sq_oracle,
    sq_series,
)
from processors.shift_ops import (
    apply_plan,
    build_selector,
    mask_oracle,
    max_selector_length,
    selector_net,
)
from processors.sparse_grid import (
    LevelIndex,
    basis_lp_norm,
    basis_nd,
    count_indices,
    enumerate_indices,
    hat_1d,
    tau_N,
)
from processors.targets import get_target
from processors.tensor_core import DataTensor
from utils.error_handler import InvalidParameterError
from utils.logger import LoggerMixin
from utils.performance import BatchEvaluator
from utils.sampling import (
    make_generator,
    pair_points,
    points_to_tensors,
    product_pair_tensors,
    uniform_tensors,
)

SUITES = ("sq", "prd", "product", "selector", "phi", "basis", "e2e", "size", "select", "sparse")


@dataclass(frozen=True)
class CheckResult:
    """
    单项检查

    Args:
        name: 检查名称
        measured: 实测值
        bound: 允许的上界
        passed: 是否通过
        seed: 产生输入的种子(确定性检查为 None)
        detail: 附加说明
    """
    name: str
    measured: float
    bound: float
    passed: bool
    seed: Optional[int] = None
    detail: str = ""


@dataclass
class VerificationReport:
    """一个套件的全部检查结果"""
    suite: str
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def add(self, name: str, measured: float, bound: float, seed: Optional[int] = None,
            detail: str = "", passed: Optional[bool] = None) -> CheckResult:
        """记录一项 measured ≤ bound 的检查"""
        measured, bound = float(measured), float(bound)
        check = CheckResult(
            name=name,
            measured=measured,
            bound=bound,
            passed=(measured <= bound) if passed is None else bool(passed),
            seed=seed,
            detail=detail,
        )
        self.checks.append(check)
        return check

    def add_identity(self, name: str, actual: int, expected: int, detail: str = "") -> CheckResult:
        """记录一项整数恒等式"""
        return self.add(name, actual, expected, detail=detail or f"期望 {expected}", passed=actual == expected)

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {
                "检查": check.name,
                "种子": "-" if check.seed is None else check.seed,
                "实测": f"{check.measured:.3e}",
                "上界": f"{check.bound:.3e}",
                "结果": "✓" if check.passed else "✗",
            }
            for check in self.checks
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {"suite": self.suite, "passed": self.passed, "checks": [asdict(c) for c in self.checks]}


@dataclass(frozen=True)
class Measurement:
    """一次误差测量"""
    bound: float
    measured: float
    samples: int


def representative_indices(dimension: int) -> List[LevelIndex]:
    """五个有代表性的层级索引(维数 D ≥ 2)"""
    last, middle = dimension - 1, dimension // 2

    def build(changes: Dict[int, tuple]) -> LevelIndex:
        l, i = [1] * dimension, [1] * dimension
        for axis, (level, position) in changes.items():
            l[axis], i[axis] = level, position
        return LevelIndex(tuple(l), tuple(i))

    return [
        build({}),
        build({0: (2, 3)}),
        build({last: (3, 5)}),
        build({0: (2, 1), last: (2, 3)}),
        build({middle: (4, 7)}),
    ]


def _max_abs(values) -> float:
    values = np.abs(np.asarray(values, dtype=np.float64))
    return float(values.max()) if values.size else 0.0


def measure_sq(n: int, c: int, d: int, k: int, samples: int, seed: int,
               evaluator: Optional[BatchEvaluator] = None) -> Measurement:
    """sq_n 网络在均匀随机张量上与 x² 的最大偏差"""
    net = build_sq_net(n, c, d, k).net
    inputs = uniform_tensors(make_generator(seed), samples, c, d)
    outputs = _run(net.forward_array, inputs, evaluator)
    return Measurement(4.0 ** -(n + 1), _max_abs(outputs - inputs ** 2), samples)


def measure_prd(n: int, d: int, k: int, samples: int, seed: int,
                evaluator: Optional[BatchEvaluator] = None) -> Measurement:
    """prd_n 网络在均匀随机 (x; y) 上与 xy 的最大偏差"""
    net = build_prd_net(n, d, k)
    inputs = uniform_tensors(make_generator(seed), samples, 2, d)
    outputs = _run(net.forward_array, inputs, evaluator)[:, 0]
    return Measurement(3.0 * 2.0 ** (-2 * n - 1), _max_abs(outputs - inputs[:, 0] * inputs[:, 1]), samples)


def product_inputs(d: int, samples: int, seed: int, sampling: str) -> np.ndarray:
    rng = make_generator(seed)
    if sampling == "pairs":
        return product_pair_tensors(rng, samples, d)
    if sampling == "uniform":
        return uniform_tensors(rng, samples, 1, d)
    raise InvalidParameterError(f"未知采样方式 {sampling}")


def measure_product(n: int, d: int, k: int, samples: int, seed: int, sampling: str = "uniform",
                    evaluator: Optional[BatchEvaluator] = None) -> Measurement:
    """Π̃_n 的 (d, d) 输出与 d² 个元素之积的最大偏差"""
    net = build_product_net(n, d, k).net
    inputs = product_inputs(d, samples, seed, sampling)
    outputs = _run(net.forward_array, inputs, evaluator)[:, 0, -1, -1]
    exact = np.prod(inputs.reshape(samples, -1), axis=1)
    return Measurement(product_error_bound(n, d), _max_abs(outputs - exact), samples)


def basis_inputs(li: LevelIndex, d: int, samples: int, seed: int, sampling: str) -> np.ndarray:
    """形如 (samples, d²) 的点"""
    rng = make_generator(seed)
    if sampling == "pairs":
        return pair_points(rng, samples, [li])
    if sampling == "uniform":
        return rng.random((samples, d * d))
    raise InvalidParameterError(f"未知采样方式 {sampling}")


def measure_basis(n: int, d: int, k: int, samples: int, seed: int, li: Optional[LevelIndex] = None,
                  sampling: str = "uniform", evaluator: Optional[BatchEvaluator] = None) -> Measurement:
    """g_{l,i} 的 (d, d) 输出与 φ_{l,i}(vect(X)) 的最大偏差"""
    li = li or LevelIndex.ones(d * d)
    net = build_basis_net(li, n, d, k).net
    points = basis_inputs(li, d, samples, seed, sampling)
    outputs = _run(net.forward_array, points_to_tensors(points, d), evaluator)[:, 0, -1, -1]
    return Measurement(basis_error_bound(n, d), _max_abs(outputs - basis_nd(li, points)), samples)


def measure_e2e(n: int, d: int, k: int, samples: int, seed: int, target: str = "hat111",
                sampling: str = "pairs", p: float = math.inf,
                evaluator: Optional[BatchEvaluator] = None) -> Measurement:
    """端到端：h_n 与目标函数的误差(逼近器只含展开中的项)"""
    target_function = get_target(target, d * d, n)
    app = build_approximator(target_function.expansion, n, d, k, index_set="expansion")
    estimate = measure_error(app, target_function.function, p, samples, seed, sampling, evaluator)
    return Measurement(e2e_error_bound(app), estimate.value, estimate.points)


def _run(func: Callable[[np.ndarray], np.ndarray], inputs: np.ndarray,
         evaluator: Optional[BatchEvaluator]) -> np.ndarray:
    return func(inputs) if evaluator is None else evaluator.map(func, inputs)


def _lanes_in_unit_interval(activations: Sequence[np.ndarray], slack: float = 1e-12) -> float:
    """所有层激活值偏离 [0, 1] 的最大量"""
    worst = 0.0
    for array in activations:
        worst = max(worst, float(np.max(array)) - 1.0, -float(np.min(array)))
    return max(worst - slack, 0.0)


class VerificationSuite(LoggerMixin):
    """
    验证套件

    所有随机输入都由 (seed, 参数) 决定，同样的参数重复运行得到同样的报告。
    """

    def __init__(self, config: Optional[Dict[str, Any]] = None, evaluator: Optional[BatchEvaluator] = None):
        """
        Args:
            config: 完整配置字典
            evaluator: 批量评估器
        """
        verification = (config or {}).get('verification', {})
        self.samples = int(verification.get('samples', 500))
        self.seed = int(verification.get('seed', 7))
        self.tolerance = float(verification.get('equivalence_tolerance', 1e-9))
        self.rate_factor = float(verification.get('rate_factor', 3.0))
        self.evaluator = evaluator

    def run(self, suite: str, **params: Any) -> VerificationReport:
        """
        运行指定套件

        Args:
            suite: 套件名称
            **params: 套件参数(d, k, n, n_max, samples, seed, ...)

        Returns:
            VerificationReport
        """
        if suite not in SUITES:
            raise InvalidParameterError(f"未知验证套件 {suite}，可选: {', '.join(SUITES)}")
        params = {key: value for key, value in params.items() if value is not None}
        params.setdefault('samples', self.samples)
        params.setdefault('seed', self.seed)
        self.logger.info(f"运行验证套件 {suite}: {params}")
        report = getattr(self, f"verify_{suite}")(**params)
        status = "通过" if report.passed else f"失败 {len(report.failures)} 项"
        self.logger.info(f"套件 {suite} 完成: {len(report.checks)} 项检查, {status}")
        for failure in report.failures:
            self.logger.error(
                f"检查失败 {failure.name}: 实测 {failure.measured:.3e} > 上界 {failure.bound:.3e} (种子 {failure.seed})"
            )
        return report

    def _rate_checks(self, report: VerificationReport, label: str, errors: Dict[int, float], seed: int):
        """相邻 n 的误差比 ≥ rate_factor"""
        levels = sorted(errors)
        for previous, current in zip(levels, levels[1:]):
            if errors[current] == 0.0:
                ratio = math.inf
            else:
                ratio = errors[previous] / errors[current]
            report.add(
                f"{label} 速率 n={previous}→{current}",
                self.rate_factor, ratio, seed=seed,
                detail=f"误差比 {ratio:.2f} ≥ {self.rate_factor}",
            )

    def verify_sq(self, n_max: int = 10, c: int = 1, d: int = 4, k: int = 1,
                  samples: int = 500, seed: int = 7, **_: Any) -> VerificationReport:
        """sq_n：插值误差区间、两种闭式解一致、网络等价、结构"""
        report = VerificationReport("sq")
        grid = np.linspace(0.0, 1.0, 10_000)
        for n in range(1, n_max + 1):
            gap = sq_oracle(n, grid) - grid ** 2
            report.add(f"sq_{n} 下界", -float(gap.min()), 0.0, detail="sq_n(x) − x² ≥ 0")
            report.add(f"sq_{n} 上界", float(gap.max()), 4.0 ** -(n + 1) + 1e-12)
            report.add(f"sq_{n} 级数交叉校验", _max_abs(sq_series(n, grid) - sq_oracle(n, grid)), 1e-12)

            sq_net = build_sq_net(n, c, d, k)
            report.add_identity(f"sq_{n} 深度", sq_net.net.depth, 2 * (n + 1))
            report.add(f"sq_{n} 宽度", sq_net.net.width, 4 * c)

            inputs = uniform_tensors(make_generator(seed + n), samples, c, d)
            outputs = _run(sq_net.net.forward_array, inputs, self.evaluator)
            report.add(f"sq_{n} 网络等价", _max_abs(outputs - sq_oracle(n, inputs)), self.tolerance, seed=seed + n)

        for m in range(1, 6):
            breakpoints = np.arange(2 ** m + 1) / 2.0 ** m
            expected = np.where(np.arange(2 ** m + 1) % 2 == 1, 1.0, 0.0)
            report.add(f"g_{m} 断点", _max_abs(g_iterate(m, breakpoints) - expected), 0.0)
        return report

    def verify_prd(self, n_max: int = 8, d: int = 4, k: int = 1,
                   samples: int = 500, seed: int = 7, **_: Any) -> VerificationReport:
        """prd_n：误差界、零化与单位元恒等式、值域、对称性、网络等价"""
        report = VerificationReport("prd")
        axis = np.linspace(0.0, 1.0, 200)
        x, y = np.meshgrid(axis, axis)
        ys = make_generator(seed).random(1000)
        for n in range(1, n_max + 1):
            values = prd_oracle(n, x, y)
            report.add(f"prd_{n} 误差界", _max_abs(values - x * y), 3.0 * 2.0 ** (-2 * n - 1))
            report.add(f"prd_{n} 值域", _lanes_in_unit_interval([values]), 0.0)
            report.add(f"prd_{n} 对称", _max_abs(values - prd_oracle(n, y, x)), 1e-15)
            report.add(f"prd_{n}(0,y)=0", _max_abs(prd_oracle(n, 0.0, ys)), 0.0, seed=seed)
            report.add(f"prd_{n}(1,y)=y", _max_abs(prd_oracle(n, 1.0, ys) - ys), 1e-14, seed=seed)

            net = build_prd_net(n, d, k)
            report.add(f"prd_{n} 网络宽度", net.width, 12)
            report.add_identity(f"prd_{n} 网络深度", net.depth, 2 * (n + 1) + 2)
            inputs = uniform_tensors(make_generator(seed + n), samples, 2, d)
            outputs = _run(net.forward_array, inputs, self.evaluator)[:, 0]
            expected = prd_oracle(n, inputs[:, 0], inputs[:, 1])
            report.add(f"prd_{n} 网络等价", _max_abs(outputs - expected), self.tolerance, seed=seed + n)
        return report

    def verify_product(self, d: int = 4, n_max: int = 6, k: int = 1,
                       samples: int = 500, seed: int = 7, **_: Any) -> VerificationReport:
        """Π̃_n：结构、与归约数值解等价、误差界、0/1 精确传播、通道值域、速率"""
        report = VerificationReport("product")
        rate_errors: Dict[int, float] = {}
        for n in range(1, n_max + 1):
            product = build_product_net(n, d, k)
            net = product.net
            report.add(f"Π_{n} 宽度", net.width, 12)
            report.add_identity(f"Π_{n} 深度", net.depth, product_depth(n, d))

            inputs = uniform_tensors(make_generator(seed + n), samples, 1, d)
            activations = net.trace_array(inputs)
            outputs = activations[-1][:, 0, -1, -1]
            oracle = np.array([reduction_oracle(n, DataTensor(x)) for x in inputs])
            exact = np.prod(inputs.reshape(samples, -1), axis=1)
            report.add(f"Π_{n} 数值解等价", _max_abs(outputs - oracle), self.tolerance, seed=seed + n)
            report.add(f"Π_{n} 误差界", _max_abs(outputs - exact), product_error_bound(n, d), seed=seed + n)
            report.add(f"Π_{n} 通道值域", _lanes_in_unit_interval(activations), 0.0, seed=seed + n)

            columns = product.column_stage.forward_array(inputs)[:, 0, :, -1]
            column_oracle = np.array([column_reduction_oracle(n, DataTensor(x)) for x in inputs])
            report.add(f"Π_{n} 列归约等价", _max_abs(columns - column_oracle), self.tolerance, seed=seed + n)

            ones = np.ones((1, 1, d, d))
            report.add(f"Π_{n} 全 1 输入", abs(net.forward_array(ones)[0, 0, -1, -1] - 1.0), 0.0)
            zeros_in = inputs.copy()
            rng = make_generator(seed + 100 + n)
            rows = rng.integers(0, d, size=samples)
            cols = rng.integers(0, d, size=samples)
            zeros_in[np.arange(samples), 0, rows, cols] = 0.0
            report.add(f"Π_{n} 含零输入", _max_abs(net.forward_array(zeros_in)[:, 0, -1, -1]), 0.0,
                       seed=seed + 100 + n)

            rate_errors[n] = measure_product(n, d, k, samples, seed, "pairs", self.evaluator).measured
        self._rate_checks(report, "Π", rate_errors, seed)
        return report

    def verify_selector(self, d: int = 5, d_max: Optional[int] = None, k: int = 1,
                        samples: int = 20, seed: int = 7, **_: Any) -> VerificationReport:
        """Δ_{m,n}：序列长度上界、平移序列与网络都精确等于掩码"""
        report = VerificationReport("selector")
        for size in range(d, (d_max or d) + 1):
            rng = make_generator(seed + size)
            inputs = uniform_tensors(rng, samples, 1, size)
            limit = max_selector_length(size)
            for m in range(1, size + 1):
                for n in range(1, size + 1):
                    plan = build_selector(m, n, size, k)
                    report.add(f"d={size} Δ_{m},{n} 长度", plan.length, limit)
                    worst = max(
                        _max_abs(apply_plan(plan, DataTensor(x)).values - mask_oracle(DataTensor(x), m, n).values)
                        for x in inputs
                    )
                    report.add(f"d={size} Δ_{m},{n} 掩码", worst, 0.0, seed=seed + size)
                    net_out = selector_net(m, n, size, k).forward_array(inputs)
                    masked = np.zeros_like(inputs)
                    masked[:, :, m - 1, n - 1] = inputs[:, :, m - 1, n - 1]
                    report.add(f"d={size} Δ_{m},{n} 网络", _max_abs(net_out - masked), 0.0, seed=seed + size)
        return report

    def verify_phi(self, d: int = 4, k: int = 1, samples: int = 500, seed: int = 7,
                   **_: Any) -> VerificationReport:
        """Φ_{l,i}：逐元素帽函数、结构"""
        report = VerificationReport("phi")
        for index, li in enumerate(representative_indices(d * d)):
            net = build_phi_net(li, d, k)
            report.add_identity(f"Φ[{index}] 深度", net.depth, phi_depth(d))
            report.add(f"Φ[{index}] 宽度", net.width, 2 * d * d)
            inputs = uniform_tensors(make_generator(seed + index), samples, 1, d)
            outputs = _run(net.forward_array, inputs, self.evaluator)
            flat = inputs.reshape(samples, -1)
            expected = np.stack([hat_1d(lj, ij, flat[:, j]) for j, (lj, ij) in enumerate(zip(li.l, li.i))], axis=1)
            report.add(f"Φ[{index}] 逐元素等价", _max_abs(outputs.reshape(samples, -1) - expected), 1e-12,
                       seed=seed + index)
        return report

    def verify_basis(self, d: int = 4, n_max: int = 6, k: int = 1, samples: int = 500, seed: int = 7,
                     **_: Any) -> VerificationReport:
        """g_{l,i}：结构、误差界、支撑包含、网格点精确为 1、速率"""
        report = VerificationReport("basis")
        indices = representative_indices(d * d)
        for index, li in enumerate(indices):
            rate_errors: Dict[int, float] = {}
            for n in range(1, n_max + 1):
                basis = build_basis_net(li, n, d, k)
                net = basis.net
                label = f"g[{index}] n={n}"
                report.add_identity(f"{label} 深度", net.depth, basis_depth(n, d))
                report.add(f"{label} 宽度", net.width, 2 * d * d)

                run_seed = seed + 31 * index + n
                uniform = basis_inputs(li, d, samples, run_seed, "uniform")
                pairs = basis_inputs(li, d, samples, run_seed, "pairs")
                points = np.concatenate([uniform, pairs])
                outputs = _run(net.forward_array, points_to_tensors(points, d), self.evaluator)[:, 0, -1, -1]
                target = basis_nd(li, points)
                report.add(f"{label} 误差界", _max_abs(outputs - target), basis_error_bound(n, d), seed=run_seed)
                report.add(f"{label} 支撑包含", _max_abs(outputs[target == 0.0]), 0.0, seed=run_seed)
                report.add(f"{label} 值域", _lanes_in_unit_interval([outputs]), 0.0, seed=run_seed)

                hats = np.stack([hat_1d(lj, ij, points[:, j]) for j, (lj, ij) in enumerate(zip(li.l, li.i))], axis=1)
                oracle = np.array([reduction_oracle(n, DataTensor(h.reshape(1, d, d))) for h in hats])
                report.add(f"{label} 数值解等价", _max_abs(outputs - oracle), self.tolerance, seed=run_seed)

                peak = net.forward_array(points_to_tensors(li.grid_point[np.newaxis, :], d))[0, 0, -1, -1]
                report.add(f"{label} 网格点", abs(peak - 1.0), 0.0)

                pair_outputs = outputs[samples:]
                rate_errors[n] = _max_abs(pair_outputs - target[samples:])
            self._rate_checks(report, f"g[{index}]", rate_errors, seed)
        return report

    def verify_e2e(self, d: int = 4, n: int = 2, n_max: int = 6, k: int = 1, target: str = "hat111",
                   samples: int = 500, seed: int = 7, p: float = math.inf, **_: Any) -> VerificationReport:
        """端到端：可精确表示的目标上的误差界与速率"""
        report = VerificationReport("e2e")
        rate_errors: Dict[int, float] = {}
        for level in range(n, n_max + 1):
            measurement = measure_e2e(level, d, k, samples, seed, target, "pairs", p, self.evaluator)
            report.add(f"{target} n={level} 误差界", measurement.measured, measurement.bound, seed=seed)
            rate_errors[level] = measurement.measured
        if math.isinf(p) and target in ("hat111", "hat-offset"):
            self._rate_checks(report, target, rate_errors, seed)
        return report

    def verify_size(self, d: int = 4, n: int = 2, k: int = 1, N: Optional[int] = None,
                    **_: Any) -> VerificationReport:
        """完整逼近器的宽度、深度、α 稀疏性与规模界"""
        report = VerificationReport("size")
        dimension = d * d
        expansion = get_target("hat111", dimension, n).expansion
        app = build_approximator(expansion, n, d, k, index_set="full")
        theta = count_indices(dimension, n)

        report.add_identity("θ_n 与枚举一致", len(enumerate_indices(dimension, n)), theta)
        report.add_identity("宽度 W = 2θ_n d²", app.width, 2 * theta * dimension)
        report.add_identity("深度 L", app.depth, approximator_depth(n, d))
        positions = np.flatnonzero(app.h.alpha_support) + 1
        report.add_identity("α 自由参数个数", len(positions), theta)
        report.add_identity("α 位置为 c·d²", int(np.all(positions % dimension == 0)), 1)

        size_report = check_size_bound(app, N)
        bound = size_report.bound if size_report.regime == "N" else size_report.n_form_bound
        report.add(f"规模界 ({size_report.regime} 形式, N={size_report.N})", size_report.size, bound,
                   passed=size_report.passed)
        report.add("构造规模界", size_report.size, size_report.construction_bound)
        report.add_identity("规模分解之和", sum(size_report.breakdown.values()), size_report.size)
        return report

    def verify_select(self, d: int = 3, epsilons: Sequence[float] = (1e-1, 1e-2, 1e-3),
                      **_: Any) -> VerificationReport:
        """select_N：代回误差界不超过 ε，且关于 ε 单调不增"""
        report = VerificationReport("select")
        for p in (2.0, math.inf):
            chosen = []
            for epsilon in sorted(epsilons, reverse=True):
                N = select_N(epsilon, p, d)
                chosen.append(N)
                log2_rhs = error_bound_for_N_log2(N, p, d)
                report.add(f"p={p} ε={epsilon:g} 误差界", log2_rhs, math.log2(epsilon),
                           detail=f"log₂N = {math.log2(N):.1f}")
            report.add(f"p={p} N 单调", int(any(a > b for a, b in zip(chosen, chosen[1:]))), 0)
        report.add("β(∞) = 1.5(d²−1)", abs(selection_beta(math.inf, d) - 1.5 * (d * d - 1)), 0.0)
        return report

    def verify_sparse(self, seed: int = 7, **_: Any) -> VerificationReport:
        """稀疏网格单元套件：范数公式、计数、τ_N 区间"""
        report = VerificationReport("sparse")
        for li in (LevelIndex((1,), (1,)), LevelIndex((3,), (5,)), LevelIndex((1, 2), (1, 3)), LevelIndex((2, 2), (1, 3))):
            for p in (2.0, math.inf):
                expected = basis_lp_norm(li, p)
                actual = _quadrature_norm(li, p)
                report.add(f"‖φ_{li.l},{li.i}‖_{p:g}", abs(actual - expected) / expected, 1e-6)

        report.add_identity("θ_1 (D=4)", count_indices(4, 1), 1)
        report.add_identity("θ_2 (D=4)", count_indices(4, 2), 9)
        report.add_identity("θ_2 枚举 (D=4)", len(enumerate_indices(4, 2)), 9)
        report.add_identity("τ_9 (D=4)", tau_N(9, 4), 2)
        report.add_identity("τ_8 (D=4)", tau_N(8, 4), 1)

        worst = 0.0
        for N in range(10, 10_001):
            tau = tau_N(N, 4)
            log_n = math.log2(N)
            worst = max(worst, math.log2(N / log_n ** 3) - tau, tau - log_n)
        report.add("τ_N 区间 (D=4, N ≤ 10⁴)", worst, 0.0)
        return report


def _quadrature_norm(li: LevelIndex, p: float) -> float:
    """在支撑盒上用 scipy 自适应积分计算 ‖φ_{l,i}‖_p"""
    box = li.support
    if math.isinf(p):
        return float(basis_nd(li, li.grid_point))
    if li.dimension == 1:
        value, _ = integrate.quad(lambda x: float(basis_nd(li, np.array([x]))) ** p, box[0, 0], box[0, 1],
                                  points=[li.grid_point[0]], epsabs=1e-14, epsrel=1e-12)
    else:
        value, _ = integrate.nquad(
            lambda x2, x1: float(basis_nd(li, np.array([x1, x2]))) ** p,
            [list(box[1]), list(box[0])],
            opts=[{"points": [li.grid_point[1]], "epsabs": 1e-14, "epsrel": 1e-12},
                  {"points": [li.grid_point[0]], "epsabs": 1e-14, "epsrel": 1e-12}],
        )
    return float(value) ** (1.0 / p)
