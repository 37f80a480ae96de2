"""
体数据与掩膜类型

INPUT:  numpy 数组, 体素间距 (mm)
OUTPUT: TextureLabel 枚举, Volume, LabelMask, LungMask 数据类, check_congruent() 函数
POS:    core-volume 的数据模型，被 atlas / reconstruct / phantom 依赖

数组按 (x, y, z) 索引，即 data[i, j, k] 对应体素 (i, j, k)；
构造后数组只读，可在并行任务间安全共享。

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

from dataclasses import dataclass
from enum import IntEnum
from typing import Tuple

import numpy as np

from lungtex.errors import GridMismatchError, InputValidationError

Spacing = Tuple[float, float, float]
Dims = Tuple[int, int, int]


class TextureLabel(IntEnum):
    """五种肺实质纹理，取值与掩膜编码 1-5 一一对应"""

    NORMAL = 1
    GG = 2
    GGR = 3
    HONEYCOMBING = 4
    EMPHYSEMA = 5

    @property
    def column(self) -> str:
        """报表列名前缀，例如 GG -> 'gg'"""
        return self.name.lower()

    @classmethod
    def from_name(cls, name: str) -> "TextureLabel":
        """按名称（大小写不敏感）解析纹理标签"""
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise InputValidationError(f"未知的纹理类别: {name!r}") from None


NUM_CLASSES = len(TextureLabel)


def _frozen_array(data, dtype) -> np.ndarray:
    arr = np.array(data, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _check_grid(shape: Tuple[int, ...], spacing) -> Spacing:
    if len(shape) != 3:
        raise InputValidationError(f"体数据必须是三维数组，当前维数为 {len(shape)}")
    if any(n < 1 for n in shape):
        raise InputValidationError(f"体数据尺寸必须全部 >= 1: {shape}")
    spacing = tuple(float(s) for s in spacing)
    if len(spacing) != 3 or any(not np.isfinite(s) or s <= 0 for s in spacing):
        raise InputValidationError(f"体素间距必须为 3 个正数: {spacing}")
    return spacing


class _Grid:
    """网格公共属性：尺寸、体素间距与体素体积"""

    spacing: Spacing

    @property
    def dims(self) -> Dims:
        return tuple(int(n) for n in self._array().shape)

    @property
    def voxel_volume_ml(self) -> float:
        sx, sy, sz = self.spacing
        return sx * sy * sz / 1000.0

    def _array(self) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Volume(_Grid):
    """CT 体数据，HU 以 int16 存储"""

    data: np.ndarray
    spacing: Spacing

    def __post_init__(self):
        data = np.asarray(self.data)
        if np.issubdtype(data.dtype, np.floating):
            data = np.clip(np.rint(data), np.iinfo(np.int16).min, np.iinfo(np.int16).max)
        object.__setattr__(self, "spacing", _check_grid(data.shape, self.spacing))
        object.__setattr__(self, "data", _frozen_array(data, np.int16))

    def _array(self) -> np.ndarray:
        return self.data


@dataclass(frozen=True, eq=False)
class LabelMask(_Grid):
    """逐体素纹理标签，0 表示未标注，1-5 对应 TextureLabel"""

    codes: np.ndarray
    spacing: Spacing

    def __post_init__(self):
        codes = np.asarray(self.codes)
        object.__setattr__(self, "spacing", _check_grid(codes.shape, self.spacing))
        if codes.size and (codes.min() < 0 or codes.max() > NUM_CLASSES):
            raise InputValidationError(f"标签编码必须在 0..{NUM_CLASSES} 之间")
        object.__setattr__(self, "codes", _frozen_array(codes, np.uint8))

    def _array(self) -> np.ndarray:
        return self.codes

    def count(self, label: TextureLabel) -> int:
        return int(np.count_nonzero(self.codes == int(label)))


@dataclass(frozen=True, eq=False)
class LungMask(_Grid):
    """逐体素肺实质归属"""

    membership: np.ndarray
    spacing: Spacing

    def __post_init__(self):
        membership = np.asarray(self.membership)
        object.__setattr__(self, "spacing", _check_grid(membership.shape, self.spacing))
        object.__setattr__(self, "membership", _frozen_array(membership != 0, np.bool_))

    def _array(self) -> np.ndarray:
        return self.membership

    @property
    def voxel_count(self) -> int:
        return int(np.count_nonzero(self.membership))


def check_congruent(reference: _Grid, other: _Grid, what: str = "掩膜") -> None:
    """
    校验两个网格尺寸与间距完全一致。

    Raises:
        GridMismatchError: 尺寸或间距不同
    """
    if reference.dims != other.dims or reference.spacing != other.spacing:
        raise GridMismatchError(
            f"{what}网格不一致: dims {other.dims} / spacing {other.spacing}, "
            f"期望 dims {reference.dims} / spacing {reference.spacing}"
        )
