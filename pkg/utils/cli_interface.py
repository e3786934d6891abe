#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
命令行界面模块
验证报告、扫描结果与构造摘要的终端输出
"""

from typing import Any, Dict, List, Optional

from .logger import LoggerMixin


class FriendlyCLI(LoggerMixin):
    """友好的CLI输出"""

    def __init__(self, app_name: str = "Korobov CNN 构造与验证工具"):
        """
        Args:
            app_name: 应用名称
        """
        self.app_name = app_name

    def print_section(self, title: str, content: str = ""):
        """
        打印章节标题

        Args:
            title: 章节标题
            content: 章节内容
        """
        print(f"\n{'─' * 60}")
        print(f"📋 {title}")
        print(f"{'─' * 60}")
        if content:
            print(content)

    def print_success(self, message: str):
        """打印成功消息"""
        print(f"\n✅ {message}")

    def print_warning(self, message: str):
        """打印警告消息"""
        print(f"\n⚠️  {message}")

    def print_error(self, message: str):
        """打印错误消息"""
        print(f"\n❌ {message}")

    def format_table(self, data: List[Dict[str, Any]], headers: Optional[List[str]] = None) -> str:
        """
        把行数据排成带边框的表格

        Args:
            data: 表格数据
            headers: 表头，缺省取第一行的键

        Returns:
            表格文本
        """
        if not data:
            return "暂无数据"

        headers = headers or list(data[0].keys())
        col_widths = {
            header: max(len(str(header)), max(len(str(row.get(header, ""))) for row in data))
            for header in headers
        }

        def line(left: str, mid: str, right: str) -> str:
            return left + mid.join("─" * (col_widths[h] + 2) for h in headers) + right

        def cells(row: Dict[str, Any]) -> str:
            return "│ " + " │ ".join(str(row.get(h, "")).ljust(col_widths[h]) for h in headers) + " │"

        lines = [line("┌", "┬", "┐"), cells({h: h for h in headers}), line("├", "┼", "┤")]
        lines.extend(cells(row) for row in data)
        lines.append(line("└", "┴", "┘"))
        return "\n".join(lines)

    def print_table(self, data: List[Dict[str, Any]], headers: Optional[List[str]] = None):
        """打印表格"""
        print(self.format_table(data, headers))

    def show_summary(self, title: str, data: Dict[str, Any]):
        """
        显示汇总信息

        Args:
            title: 标题
            data: 汇总数据
        """
        print(f"\n📊 {title}")
        print("─" * 40)
        for key, value in data.items():
            print(f"  {key}: {value}")
