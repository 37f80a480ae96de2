"""
lungquant 工具函数

INPUT:  file_ops 模块
OUTPUT: ArtifactLayout, write_json, read_json, write_csv, read_csv, to_jsonable
POS:    工具包入口
"""

from lungquant.utils.file_ops import (
    ArtifactLayout,
    read_csv,
    read_json,
    to_jsonable,
    write_csv,
    write_json,
)

__all__ = [
    "ArtifactLayout",
    "read_csv",
    "read_json",
    "to_jsonable",
    "write_csv",
    "write_json",
]
