"""
PatchSet 归档

INPUT:  PatchSet, 目录与名称
OUTPUT: save_patchset(), load_patchset() 函数
POS:    sample 子命令的产出格式，被 train / evaluate / hypersearch 读取

每个归档由三个文件组成：
    <name>.json  头信息（规格、数量、来源扫描、张量形状）
    <name>.f32   float32 小端张量块，按记录顺序 C 序排列
    <name>.csv   逐记录表 (label, origin_i, origin_j, origin_k, scan_id, fill)
"""

import json
import logging
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from lungtex.atlas.patchset import PatchSet
from lungtex.atlas.spec import PatchSpec
from lungtex.errors import InputValidationError
from lungtex.volume.types import TextureLabel

logger = logging.getLogger(__name__)

ARCHIVE_FORMAT = "lungtex-patchset"
ARCHIVE_VERSION = 1

PathLike = Union[str, Path]


def save_patchset(patchset: PatchSet, directory: PathLike, name: str) -> Path:
    """
    写出 PatchSet 归档。

    Returns:
        头文件路径
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    header_path = directory / f"{name}.json"
    tensor_file = f"{name}.f32"
    records_file = f"{name}.csv"

    header = {
        "format": ARCHIVE_FORMAT,
        "version": ARCHIVE_VERSION,
        "spec": patchset.spec.to_dict(),
        "split_tag": patchset.split_tag,
        "count": len(patchset),
        "tensor_shape": list(patchset.spec.tensor_shape),
        "class_counts": {label.name: n for label, n in patchset.class_counts().items()},
        "scans": patchset.scan_set,
        "tensor_file": tensor_file,
        "records_file": records_file,
    }

    (directory / tensor_file).write_bytes(
        np.ascontiguousarray(patchset.tensors, dtype="<f4").tobytes()
    )
    records = pd.DataFrame({
        "label": [TextureLabel(int(c)).name for c in patchset.labels],
        "origin_i": patchset.origins[:, 0],
        "origin_j": patchset.origins[:, 1],
        "origin_k": patchset.origins[:, 2],
        "scan_id": list(patchset.scan_ids),
        "fill": patchset.fills,
    })
    records.to_csv(directory / records_file, index=False)
    header_path.write_text(json.dumps(header, indent=2) + "\n", encoding="utf-8")

    logger.info(f"已写出 PatchSet 归档: {header_path} ({len(patchset)} 个 patch, {patchset.split_tag})")
    return header_path


def load_patchset(header_path: PathLike) -> PatchSet:
    """
    读取 PatchSet 归档。

    Raises:
        InputValidationError: 文件缺失、格式或长度不符
    """
    header_path = Path(header_path)
    if not header_path.exists():
        raise InputValidationError(f"PatchSet 归档不存在: {header_path}")
    header = json.loads(header_path.read_text(encoding="utf-8"))
    if header.get("format") != ARCHIVE_FORMAT or header.get("version") != ARCHIVE_VERSION:
        raise InputValidationError(f"不支持的 PatchSet 归档: {header.get('format')} v{header.get('version')}")

    spec = PatchSpec.from_dict(header["spec"])
    count = int(header["count"])
    shape = tuple(header["tensor_shape"])

    raw = (header_path.parent / header["tensor_file"]).read_bytes()
    expected = count * int(np.prod(shape)) * 4
    if len(raw) != expected:
        raise InputValidationError(f"张量块长度不符: {len(raw)} 字节，期望 {expected} 字节")
    tensors = np.frombuffer(raw, dtype="<f4").reshape((count,) + shape).astype(np.float32)

    records = pd.read_csv(
        header_path.parent / header["records_file"],
        dtype={"scan_id": str, "label": str},
        float_precision="round_trip",
        keep_default_na=False,
    )
    if len(records) != count:
        raise InputValidationError(f"记录表行数 {len(records)} 与头信息 {count} 不符")

    return PatchSet(
        spec=spec,
        tensors=tensors,
        labels=np.asarray([int(TextureLabel.from_name(n)) for n in records["label"]], dtype=np.uint8),
        origins=records[["origin_i", "origin_j", "origin_k"]].to_numpy(dtype=np.int64).reshape(-1, 3),
        scan_ids=tuple(records["scan_id"]),
        fills=records["fill"].to_numpy(dtype=np.float64),
        split_tag=header["split_tag"],
    )
