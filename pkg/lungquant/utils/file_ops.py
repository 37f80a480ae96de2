"""
产物文件读写

INPUT:  输出目录, JSON 可序列化对象, DataFrame
OUTPUT: ArtifactLayout 类, write_json(), read_json(), write_csv(), to_jsonable() 函数
POS:    工具函数，统一所有子命令的产物路径与序列化格式（字节级可复现）

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Union

import numpy as np
import pandas as pd

from lungtex.errors import InputValidationError

PathLike = Union[str, Path]


def to_jsonable(value: Any) -> Any:
    """
    递归转换为 JSON 原生类型。

    numpy 标量 / 数组转为 Python 值，非有限浮点数 (NaN, ±inf) 转为 None，
    枚举取 value，Path 取字符串。
    """
    if isinstance(value, dict):
        return {str(to_jsonable(k)): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, Enum):
        return to_jsonable(value.value)
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def write_json(data: Any, path: PathLike) -> Path:
    """写出 JSON：缩进 2、保留键顺序、UTF-8、末尾换行"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(to_jsonable(data), indent=2, ensure_ascii=False, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def read_json(path: PathLike) -> Any:
    """
    读取 JSON 文件。

    Raises:
        InputValidationError: 文件不存在或不是合法 JSON
    """
    path = Path(path)
    if not path.exists():
        raise InputValidationError(f"文件不存在: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InputValidationError(f"JSON 解析失败 {path}: {e}") from e


def write_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    """写出 CSV：不含索引，浮点数按往返精度格式化"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path


def read_csv(path: PathLike, what: str = "CSV") -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise InputValidationError(f"{what} 不存在: {path}")
    return pd.read_csv(path, dtype={"scan_id": str}, keep_default_na=False, na_values=[""],
                       float_precision="round_trip")


@dataclass(frozen=True)
class ArtifactLayout:
    """输出目录中各产物的固定位置"""

    root: Path

    @property
    def phantoms_dir(self) -> Path:
        return self.root / "phantoms"

    @property
    def manifest(self) -> Path:
        return self.root / "manifest.json"

    @property
    def atlas_summary(self) -> Path:
        return self.root / "atlas_summary.json"

    @property
    def patches_dir(self) -> Path:
        return self.root / "patches"

    def patchset_header(self, split: str) -> Path:
        return self.patches_dir / f"{split}.json"

    @property
    def splits(self) -> Path:
        return self.root / "splits.json"

    @property
    def model(self) -> Path:
        return self.root / "model.tqwt"

    @property
    def history(self) -> Path:
        return self.root / "history.csv"

    @property
    def train_summary(self) -> Path:
        return self.root / "train_summary.json"

    @property
    def hypersearch_dir(self) -> Path:
        return self.root / "hypersearch"

    @property
    def maps_dir(self) -> Path:
        return self.root / "maps"

    def class_map(self, scan_id: str) -> Path:
        return self.maps_dir / f"{scan_id}_map.rvol.json"

    @property
    def quant_dir(self) -> Path:
        return self.root / "quant"

    def quant_report(self, scan_id: str) -> Path:
        return self.quant_dir / f"{scan_id}.json"

    @property
    def quant_table(self) -> Path:
        return self.root / "quant_reports.csv"

    @property
    def evaluation_report(self) -> Path:
        return self.root / "evaluation_report.json"

    def roc_csv(self, split: str) -> Path:
        return self.root / f"roc_{split}.csv"

    def roc_svg(self, split: str) -> Path:
        return self.root / f"roc_{split}.svg"

    @property
    def correlation_json(self) -> Path:
        return self.root / "correlation.json"

    @property
    def correlation_csv(self) -> Path:
        return self.root / "correlation.csv"

    @property
    def report_json(self) -> Path:
        return self.root / "report.json"

    @property
    def report_md(self) -> Path:
        return self.root / "report.md"
