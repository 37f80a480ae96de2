"""
RVOL 文件读写

INPUT:  Volume / LabelMask / LungMask 对象, 文件路径
OUTPUT: read_rvol(), write_rvol(), load_volume(), save_volume(),
        load_label_mask(), save_label_mask(), load_lung_mask(), save_lung_mask() 函数
POS:    体数据与掩膜的持久化格式，被 CLI、phantom 与 reconstruct 依赖

格式：`<name>.rvol.json` 头文件
    {"dims": [nx, ny, nz], "spacing_mm": [sx, sy, sz], "dtype": "int16",
     "byte_order": "little", "data_file": "<name>.raw"}
加上同目录下的原始数据文件，体素按 x 最快、其次 y、最后 z 的顺序存放。
掩膜使用 dtype "uint8"。

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import json
import logging
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from lungtex.errors import VolumeFormatError
from lungtex.volume.types import LabelMask, LungMask, Spacing, Volume

logger = logging.getLogger(__name__)

RVOL_SUFFIX = ".rvol.json"

# 头文件 dtype 名称 -> 小端 numpy dtype
RVOL_DTYPES = {
    "int16": np.dtype("<i2"),
    "uint8": np.dtype("u1"),
}

PathLike = Union[str, Path]


def header_path(path: PathLike) -> Path:
    """规范化为 `<name>.rvol.json` 头文件路径"""
    path = Path(path)
    if path.name.endswith(RVOL_SUFFIX):
        return path
    return path.with_name(path.name + RVOL_SUFFIX)


def write_rvol(array: np.ndarray, spacing: Spacing, path: PathLike, dtype: str) -> Path:
    """
    写出 RVOL 头文件与原始数据。

    Args:
        array: (nx, ny, nz) 数组
        spacing: 体素间距 (mm)
        path: 目标路径（可省略 .rvol.json 后缀）
        dtype: "int16" 或 "uint8"

    Returns:
        头文件路径
    """
    if dtype not in RVOL_DTYPES:
        raise VolumeFormatError(f"不支持的 RVOL dtype: {dtype}")

    hdr_path = header_path(path)
    stem = hdr_path.name[: -len(RVOL_SUFFIX)]
    raw_name = f"{stem}.raw"
    hdr_path.parent.mkdir(parents=True, exist_ok=True)

    header = {
        "dims": [int(n) for n in array.shape],
        "spacing_mm": [float(s) for s in spacing],
        "dtype": dtype,
        "byte_order": "little",
        "data_file": raw_name,
    }
    raw = np.asarray(array).astype(RVOL_DTYPES[dtype], copy=False).ravel(order="F").tobytes()
    (hdr_path.parent / raw_name).write_bytes(raw)
    hdr_path.write_text(json.dumps(header, indent=2) + "\n", encoding="utf-8")

    logger.debug(f"已写出 RVOL: {hdr_path} ({len(raw)} 字节)")
    return hdr_path


def read_rvol(path: PathLike) -> Tuple[np.ndarray, Spacing, str]:
    """
    读取 RVOL 文件。

    Args:
        path: 头文件路径（可省略 .rvol.json 后缀）

    Returns:
        (数组, 体素间距, dtype 名称)

    Raises:
        VolumeFormatError: 文件缺失、头信息非法、数据长度与 dims 不符
    """
    hdr_path = header_path(path)
    if not hdr_path.exists():
        raise VolumeFormatError(f"RVOL 头文件不存在: {hdr_path}")

    try:
        header = json.loads(hdr_path.read_text(encoding="utf-8"))
        dims = tuple(int(n) for n in header["dims"])
        spacing = tuple(float(s) for s in header["spacing_mm"])
        dtype_name = header["dtype"]
        raw_name = header["data_file"]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise VolumeFormatError(f"RVOL 头文件格式错误 {hdr_path}: {e}") from e

    if len(dims) != 3 or any(n < 1 for n in dims):
        raise VolumeFormatError(f"RVOL dims 非法: {dims}")
    if len(spacing) != 3 or any(s <= 0 for s in spacing):
        raise VolumeFormatError(f"RVOL 体素间距必须为正数: {spacing}")
    if dtype_name not in RVOL_DTYPES:
        raise VolumeFormatError(f"不支持的 RVOL dtype: {dtype_name}")
    if header.get("byte_order", "little") != "little":
        raise VolumeFormatError(f"仅支持小端字节序: {header.get('byte_order')}")

    raw_path = hdr_path.parent / raw_name
    if not raw_path.exists():
        raise VolumeFormatError(f"RVOL 数据文件不存在: {raw_path}")

    dtype = RVOL_DTYPES[dtype_name]
    raw = raw_path.read_bytes()
    expected = int(np.prod(dims)) * dtype.itemsize
    if len(raw) != expected:
        raise VolumeFormatError(
            f"RVOL 数据长度不符: {raw_path} 有 {len(raw)} 字节，dims {dims} 需要 {expected} 字节"
        )

    array = np.frombuffer(raw, dtype=dtype).reshape(dims, order="F")
    return array, spacing, dtype_name


def save_volume(volume: Volume, path: PathLike) -> Path:
    """保存 CT 体数据（int16）"""
    return write_rvol(volume.data, volume.spacing, path, "int16")


def load_volume(path: PathLike) -> Volume:
    """读取 CT 体数据"""
    array, spacing, dtype_name = read_rvol(path)
    if dtype_name != "int16":
        raise VolumeFormatError(f"体数据必须为 int16，实际为 {dtype_name}")
    return Volume(data=array, spacing=spacing)


def save_label_mask(mask: LabelMask, path: PathLike) -> Path:
    """保存纹理标签掩膜（uint8）"""
    return write_rvol(mask.codes, mask.spacing, path, "uint8")


def load_label_mask(path: PathLike) -> LabelMask:
    """读取纹理标签掩膜"""
    array, spacing, dtype_name = read_rvol(path)
    if dtype_name != "uint8":
        raise VolumeFormatError(f"标签掩膜必须为 uint8，实际为 {dtype_name}")
    return LabelMask(codes=array, spacing=spacing)


def save_lung_mask(mask: LungMask, path: PathLike) -> Path:
    """保存肺掩膜（uint8，0/1）"""
    return write_rvol(mask.membership.astype(np.uint8), mask.spacing, path, "uint8")


def load_lung_mask(path: PathLike) -> LungMask:
    """读取肺掩膜"""
    array, spacing, dtype_name = read_rvol(path)
    if dtype_name != "uint8":
        raise VolumeFormatError(f"肺掩膜必须为 uint8，实际为 {dtype_name}")
    return LungMask(membership=array, spacing=spacing)
