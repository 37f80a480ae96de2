"""
lungquant 子命令

INPUT:  base, data, model, inference, analysis 模块
OUTPUT: COMMANDS 注册表, CommandContext, CommandResult
POS:    子命令包入口，cli 通过 COMMANDS 按名称分派
"""

from typing import Callable, Dict

from lungquant.commands.analysis import run_correlate, run_evaluate, run_report
from lungquant.commands.base import CommandContext, CommandResult
from lungquant.commands.data import run_atlas, run_phantom, run_sample
from lungquant.commands.inference import run_classify, run_quantify
from lungquant.commands.model import run_hypersearch, run_train

# 子命令名称 -> 实现，顺序即流水线顺序
COMMANDS: Dict[str, Callable[[CommandContext], CommandResult]] = {
    "phantom": run_phantom,
    "atlas": run_atlas,
    "sample": run_sample,
    "train": run_train,
    "hypersearch": run_hypersearch,
    "classify": run_classify,
    "quantify": run_quantify,
    "evaluate": run_evaluate,
    "correlate": run_correlate,
    "report": run_report,
}

__all__ = [
    "COMMANDS",
    "CommandContext",
    "CommandResult",
    # 数据
    "run_phantom",
    "run_atlas",
    "run_sample",
    # 模型
    "run_train",
    "run_hypersearch",
    # 推理
    "run_classify",
    "run_quantify",
    # 分析
    "run_evaluate",
    "run_correlate",
    "run_report",
]
