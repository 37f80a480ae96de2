"""
坐标换算

INPUT:  体素间距 (mm), 物理半径 (mm)
OUTPUT: mm_to_voxel_radius(), ellipsoid_offsets() 函数
POS:    选择半径（排除球）的体素化，被 atlas.sampling 使用
"""

from typing import Tuple

import numpy as np

from lungtex.errors import InputValidationError
from lungtex.volume.types import Spacing


def mm_to_voxel_radius(spacing: Spacing, radius_mm: float) -> Tuple[float, float, float]:
    """
    将物理半径换算为各轴的体素半径。

    各向异性体素下排除球是一个椭球：调用方比较
    Σ (Δ_axis / r_axis)² 与 1 的大小。

    Args:
        spacing: (sx, sy, sz) mm
        radius_mm: 物理半径，必须 > 0

    Returns:
        (rx, ry, rz) 实数体素半径
    """
    if radius_mm <= 0:
        raise InputValidationError(f"radius_mm 必须 > 0，当前为 {radius_mm}")
    return tuple(float(radius_mm) / float(s) for s in spacing)


def ellipsoid_offsets(radii: Tuple[float, float, float]) -> np.ndarray:
    """
    枚举归一化距离平方 <= 1 的全部整数偏移。

    Returns:
        (M, 3) int64 偏移数组，包含原点
    """
    spans = [np.arange(-int(np.floor(r)), int(np.floor(r)) + 1) for r in radii]
    di, dj, dk = np.meshgrid(*spans, indexing="ij")
    d2 = (di / radii[0]) ** 2 + (dj / radii[1]) ** 2 + (dk / radii[2]) ** 2
    inside = d2 <= 1.0
    return np.stack([di[inside], dj[inside], dk[inside]], axis=1).astype(np.int64)
