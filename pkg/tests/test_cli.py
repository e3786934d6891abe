#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
命令行与批量扫描测试
"""

import json
import sys
from pathlib import Path

import pandas as pd
import pytest

# 添加项目路径
sys.path.append(str(Path(__file__).parent.parent))

from batch_process import SWEEP_COLUMNS, SweepRunner
from main import main, parse_level_index
from utils.error_handler import InvalidParameterError


@pytest.fixture
def base_args(tmp_path):
    """不存在的配置文件：使用内置默认值"""
    return ["-c", str(tmp_path / "missing.yaml"), "--log-level", "WARNING"]


class TestBuildCommand:
    """build 子命令测试类"""

    def test_build_sq(self, base_args, tmp_path):
        """构造 sq_2 并写出 NetworkFile"""
        out = tmp_path / "sq.json"
        assert main(base_args + ["build", "sq", "--n", "2", "--out", str(out)]) == 0
        data = json.loads(out.read_text(encoding="utf-8"))
        assert data["metadata"]["depth"] == 6
        assert data["metadata"]["size"] == 29
        assert data["metadata"]["parameters"] == {"d": 4, "k": 1, "n": 2, "c": 1}

    def test_build_approximator(self, base_args, tmp_path):
        """逼近器带读出系数"""
        out = tmp_path / "h.json"
        assert main(base_args + ["build", "approximator", "--n", "1", "--out", str(out)]) == 0
        data = json.loads(out.read_text(encoding="utf-8"))
        assert data["readout"]["entries"] == [[16, 1.0]]

    def test_build_basis_with_index(self, base_args, tmp_path):
        """--index 指定层级索引"""
        out = tmp_path / "g.json"
        assert main(base_args + ["build", "basis", "--n", "1", "--index", "2:3", "--out", str(out)]) == 0
        parameters = json.loads(out.read_text(encoding="utf-8"))["metadata"]["parameters"]
        assert parameters["l"][:2] == [2, 1] and parameters["i"][:2] == [3, 1]

    def test_export_csv(self, base_args, tmp_path):
        """export 把 NetworkFile 转成 CSV"""
        network = tmp_path / "prd.json"
        table = tmp_path / "prd.csv"
        assert main(base_args + ["build", "prd", "--n", "1", "--out", str(network)]) == 0
        assert main(base_args + ["export", str(network), "--out", str(table)]) == 0
        frame = pd.read_csv(table)
        assert len(frame) == json.loads(network.read_text(encoding="utf-8"))["metadata"]["size"]

    def test_unsupported_construction(self, base_args):
        """d < 3 的基网络：退出码 2"""
        assert main(base_args + ["build", "basis", "--d", "2", "--n", "1"]) == 2


class TestVerifyCommand:
    """verify 子命令测试类"""

    def test_verify_passes(self, base_args, tmp_path):
        """通过时退出码 0，并写出 JSON 报告"""
        out = tmp_path / "report.json"
        code = main(base_args + ["verify", "prd", "--n-max", "2", "--samples", "30", "--out", str(out)])
        assert code == 0
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["suite"] == "prd" and report["passed"]
        assert report["error_report"] == {"status": "success", "errors": []}

    def test_verify_violation(self, tmp_path, capsys):
        """速率要求无法满足时退出码 1，报告中附带错误报告"""
        config = tmp_path / "strict.yaml"
        config.write_text("verification:\n  rate_factor: 1000.0\n", encoding="utf-8")
        out = tmp_path / "strict.json"
        code = main(["-c", str(config), "--log-level", "ERROR", "verify", "product",
                     "--n-max", "2", "--samples", "50", "--out", str(out)])
        assert code == 1
        assert "实测值超出理论界" in capsys.readouterr().err
        report = json.loads(out.read_text(encoding="utf-8"))
        failures = [check for check in report["checks"] if not check["passed"]]
        errors = report["error_report"]
        assert not report["passed"] and failures
        assert errors["status"] == "error"
        assert errors["total_errors"] == len(failures)
        assert all(error["code"] == "BOUND_VIOLATION" for error in errors["errors"])

    def test_select(self, base_args):
        """select 子命令"""
        assert main(base_args + ["select", "--d", "3", "--epsilon", "0.01"]) == 0


class TestUsage:
    """用法错误测试类"""

    def test_help(self, base_args):
        assert main(base_args + ["--help"]) == 0

    def test_unknown_command(self, base_args):
        assert main(base_args + ["train"]) == 2

    def test_missing_required(self, base_args):
        assert main(base_args + ["select", "--d", "3"]) == 2

    def test_invalid_level(self, base_args):
        """n = 0 是前置条件错误"""
        assert main(base_args + ["build", "sq", "--n", "0"]) == 2

    def test_parse_level_index(self):
        """缺省项补 1"""
        li = parse_level_index("2,3:3,5", 4)
        assert li.l == (2, 3, 1, 1) and li.i == (3, 5, 1, 1)
        with pytest.raises(InvalidParameterError):
            parse_level_index("2,3", 4)
        with pytest.raises(InvalidParameterError):
            parse_level_index("2:3,5", 4)


class TestSweep:
    """扫描测试类"""

    def test_sweep_csv(self, base_args, tmp_path):
        """固定表头、每个 n 一行，除耗时外可复现"""
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["sweep", "sq", "--n-min", "1", "--n-max", "3", "--samples", "50", "--seed", "3"]
        assert main(base_args + args + ["--out", str(first)]) == 0
        assert main(base_args + args + ["--out", str(second)]) == 0
        assert first.read_text(encoding="utf-8").splitlines()[0] == ",".join(SWEEP_COLUMNS)
        a, b = pd.read_csv(first), pd.read_csv(second)
        assert list(a["n"]) == [1, 2, 3]
        pd.testing.assert_frame_equal(a.drop(columns="wall_time_ms"), b.drop(columns="wall_time_ms"))
        assert (a["measured_error"] <= a["bound"]).all()

    def test_empty_range(self, base_args, tmp_path):
        """n_min > n_max：退出码 2 且不写文件"""
        out = tmp_path / "empty.csv"
        assert main(base_args + ["sweep", "prd", "--n-min", "3", "--n-max", "2", "--out", str(out)]) == 2
        assert not out.exists()

    def test_runner_without_file(self):
        """不给输出路径时只返回表格"""
        frame = SweepRunner().run("product", n_min=1, n_max=2, samples=40, seed=2, sampling="uniform")
        assert list(frame.columns) == SWEEP_COLUMNS
        assert SweepRunner.violations(frame) == 0
        with pytest.raises(InvalidParameterError):
            SweepRunner().run("fourier", n_min=1, n_max=1)
