"""
core-volume: 体数据、掩膜与 RVOL 格式

INPUT:  numpy 数组 / RVOL 文件
OUTPUT: 数据类型、读写函数、坐标换算、阈值肺掩膜
POS:    最底层数据模块，被其他所有业务模块依赖
"""

from lungtex.volume.types import (
    TextureLabel,
    NUM_CLASSES,
    Volume,
    LabelMask,
    LungMask,
    check_congruent,
)
from lungtex.volume.rvol import (
    RVOL_SUFFIX,
    read_rvol,
    write_rvol,
    load_volume,
    save_volume,
    load_label_mask,
    save_label_mask,
    load_lung_mask,
    save_lung_mask,
)
from lungtex.volume.geometry import mm_to_voxel_radius, ellipsoid_offsets
from lungtex.volume.lung_mask import threshold_lung_mask

__all__ = [
    "TextureLabel",
    "NUM_CLASSES",
    "Volume",
    "LabelMask",
    "LungMask",
    "check_congruent",
    "RVOL_SUFFIX",
    "read_rvol",
    "write_rvol",
    "load_volume",
    "save_volume",
    "load_label_mask",
    "save_label_mask",
    "load_lung_mask",
    "save_lung_mask",
    "mm_to_voxel_radius",
    "ellipsoid_offsets",
    "threshold_lung_mask",
]
