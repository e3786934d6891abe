#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
网络文件模块
卷积网络与读出系数的 JSON 序列化(可逐字节往返)以及 CSV 导出
"""

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

sys.path.append(str(Path(__file__).parent.parent))

from processors.cnn_builder import ConvLayer, ConvNet, HypothesisFunction
from processors.tensor_core import BiasVector, ConvKernel
from utils.error_handler import NetworkFormatError
from utils.file_utils import FileUtils
from utils.logger import get_logger

logger = get_logger(__name__)

SCHEMA_VERSION = 1
DEFAULT_DENSE_LIMIT = 4096
INDEX_CONVENTION = {"channels": "1-based", "row": "s + k", "col": "t + k"}


def _encode_kernel(kernel: ConvKernel, dense_limit: int) -> Dict[str, Any]:
    k = kernel.half_width
    spatial = 2 * k + 1
    if kernel.out_channels * kernel.in_channels * spatial * spatial <= dense_limit:
        return {
            "encoding": "dense",
            "shape": [kernel.out_channels, kernel.in_channels, spatial, spatial],
            "values": kernel.to_dense().tolist(),
            "support": kernel.support_mask().astype(int).tolist(),
        }
    entries = [
        [int(p) + 1, int(q) + 1, int(s) + k, int(t) + k, float(value)]
        for p, q, s, t, value in zip(kernel.p, kernel.q, kernel.s, kernel.t, kernel.values)
    ]
    return {
        "encoding": "sparse",
        "shape": [kernel.out_channels, kernel.in_channels, spatial, spatial],
        "entries": entries,
    }


def _decode_kernel(data: Dict[str, Any]) -> ConvKernel:
    out_channels, in_channels, spatial, _ = data["shape"]
    k = spatial // 2
    if data["encoding"] == "dense":
        values = np.asarray(data["values"], dtype=np.float64)
        support = np.asarray(data["support"], dtype=bool)
        if values.shape != tuple(data["shape"]) or support.shape != values.shape:
            raise NetworkFormatError(f"稠密卷积核形状与声明的 {data['shape']} 不一致")
        p, q, row, col = np.nonzero(support)
        return ConvKernel(out_channels, in_channels, k, p, q, row - k, col - k, values[p, q, row, col])
    if data["encoding"] == "sparse":
        entries = np.asarray(data["entries"], dtype=np.float64).reshape(-1, 5)
        return ConvKernel(
            out_channels, in_channels, k,
            entries[:, 0].astype(np.int64) - 1,
            entries[:, 1].astype(np.int64) - 1,
            entries[:, 2].astype(np.int64) - k,
            entries[:, 3].astype(np.int64) - k,
            entries[:, 4],
        )
    raise NetworkFormatError(f"未知的卷积核编码 {data['encoding']}")


@dataclass(frozen=True, eq=False)
class NetworkFile:
    """
    网络文件

    Args:
        metadata: 元数据(构造名称、参数、d、k、通道数等)
        net: 卷积网络
        readout: 可选的读出(假设函数)
    """
    metadata: Dict[str, Any]
    net: ConvNet
    readout: Optional[HypothesisFunction] = None

    @classmethod
    def create(
        cls,
        net: ConvNet,
        construction: str,
        parameters: Dict[str, Any],
        anchor: str = "",
        readout: Optional[HypothesisFunction] = None,
        dense_limit: int = DEFAULT_DENSE_LIMIT
    ) -> "NetworkFile":
        """
        由内存中的网络创建文件对象并补全元数据

        Args:
            net: 卷积网络
            construction: 构造名称(sq, prd, product, phi, basis, approximator)
            parameters: 构造参数
            anchor: 构造的说明文字
            readout: 可选的假设函数，其网络必须就是 net
            dense_limit: 不超过该条目数的卷积核用稠密编码
        """
        size = net.size + (readout.readout_size if readout is not None else 0)
        metadata = {
            "construction": construction,
            "parameters": dict(parameters),
            "anchor": anchor,
            "d": net.spatial,
            "k": net.half_width,
            "channel_sizes": net.channel_sizes,
            "depth": net.depth,
            "width": net.width,
            "size": size,
            "index_convention": dict(INDEX_CONVENTION),
            "dense_kernel_limit": int(dense_limit),
        }
        return cls(metadata=metadata, net=net, readout=readout)

    def to_dict(self) -> Dict[str, Any]:
        dense_limit = int(self.metadata.get("dense_kernel_limit", DEFAULT_DENSE_LIMIT))
        data: Dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "metadata": self.metadata,
            "input_channels": self.net.input_channels,
            "layers": [
                {
                    "kernel": _encode_kernel(layer.kernel, dense_limit),
                    "bias": {
                        "values": layer.bias.values.tolist(),
                        "support": layer.bias.support.astype(int).tolist(),
                    },
                }
                for layer in self.net.layers
            ],
        }
        if self.readout is not None:
            positions = np.flatnonzero(self.readout.alpha_support)
            data["readout"] = {
                "length": len(self.readout.alpha),
                "entries": [[int(i) + 1, float(self.readout.alpha[i])] for i in positions],
                "beta": self.readout.beta,
                "beta_free": self.readout.beta_free,
            }
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "NetworkFile":
        if data.get("schema_version") != SCHEMA_VERSION:
            raise NetworkFormatError(f"不支持的 schema_version: {data.get('schema_version')}")
        try:
            metadata = data["metadata"]
            layers = tuple(
                ConvLayer(
                    _decode_kernel(layer["kernel"]),
                    BiasVector(layer["bias"]["values"], np.asarray(layer["bias"]["support"], dtype=bool)),
                )
                for layer in data["layers"]
            )
            net = ConvNet(layers, data["input_channels"], metadata["d"], metadata["k"])

            readout = None
            if "readout" in data:
                block = data["readout"]
                alpha = np.zeros(block["length"])
                support = np.zeros(block["length"], dtype=bool)
                for position, value in block["entries"]:
                    alpha[position - 1] = value
                    support[position - 1] = True
                readout = HypothesisFunction(net, alpha, block["beta"], support, block["beta_free"])
        except (KeyError, TypeError, ValueError) as e:
            raise NetworkFormatError(f"网络文件内容无效: {e}") from e
        return cls(metadata=metadata, net=net, readout=readout)

    def dumps(self) -> str:
        """规范化文本：固定键顺序、repr 浮点数、紧凑分隔符"""
        return json.dumps(self.to_dict(), ensure_ascii=False, separators=(",", ":")) + "\n"

    @classmethod
    def loads(cls, text: str) -> "NetworkFile":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise NetworkFormatError(f"网络文件不是合法的 JSON: {e}") from e
        return cls.from_dict(data)

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        FileUtils.write_text_file(path, self.dumps())
        size = FileUtils.format_file_size(path.stat().st_size)
        logger.info(f"网络文件已保存: {path} ({size}, 深度 {self.net.depth}, 宽度 {self.net.width})")
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "NetworkFile":
        return cls.loads(FileUtils.read_text_file(path))

    def to_frame(self) -> pd.DataFrame:
        """每个自由参数一行：kind, layer, p, q, s, t, value"""
        rows: List[Dict[str, Any]] = []
        for index, layer in enumerate(self.net.layers, 1):
            kernel = layer.kernel
            for p, q, s, t, value in zip(kernel.p, kernel.q, kernel.s, kernel.t, kernel.values):
                rows.append({"kind": "kernel", "layer": index, "p": int(p) + 1, "q": int(q) + 1,
                             "s": int(s), "t": int(t), "value": float(value)})
            for p in np.flatnonzero(layer.bias.support):
                rows.append({"kind": "bias", "layer": index, "p": int(p) + 1, "q": 0,
                             "s": 0, "t": 0, "value": float(layer.bias.values[p])})
        if self.readout is not None:
            for position in np.flatnonzero(self.readout.alpha_support):
                rows.append({"kind": "alpha", "layer": 0, "p": int(position) + 1, "q": 0,
                             "s": 0, "t": 0, "value": float(self.readout.alpha[position])})
            if self.readout.beta_free:
                rows.append({"kind": "beta", "layer": 0, "p": 0, "q": 0, "s": 0, "t": 0,
                             "value": self.readout.beta})
        return pd.DataFrame(rows, columns=["kind", "layer", "p", "q", "s", "t", "value"])


def export_network(network_file: NetworkFile, out_path: Union[str, Path], fmt: str = "json") -> Path:
    """
    导出网络文件

    Args:
        network_file: 网络文件
        out_path: 输出路径
        fmt: json 或 csv

    Returns:
        输出路径
    """
    out_path = Path(out_path)
    if fmt == "json":
        return network_file.save(out_path)
    if fmt == "csv":
        FileUtils.ensure_dir(out_path.parent)
        network_file.to_frame().to_csv(out_path, index=False)
        logger.info(f"参数表已导出: {out_path}")
        return out_path
    raise NetworkFormatError(f"未知导出格式 {fmt}")
