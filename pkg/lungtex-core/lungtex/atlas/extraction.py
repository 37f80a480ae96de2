"""
Patch 足迹、提取与填充率

INPUT:  Volume / LabelMask, 中心体素, PatchSpec
OUTPUT: footprint_in_bounds(), in_bounds_mask(), extract_patch(), fill_factor(),
        footprint_label_counts() 函数
POS:    patch 几何的唯一实现，被 sampling（训练/验证 patch）和 reconstruct（滑窗推理）共用

足迹以中心为基准，在使用的各轴上覆盖 [c - ⌊N/2⌋, c - ⌊N/2⌋ + N)：
2D 为中心所在轴位平面，3D 为立方体，2.5D 为经过中心的轴位、冠状、矢状
三个 N×N 平面的并集。

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

from typing import Sequence, Tuple

import numpy as np
from scipy import ndimage

from lungtex.atlas.spec import Dimensionality, PatchSpec
from lungtex.errors import FootprintOutOfBoundsError
from lungtex.volume.types import LabelMask, TextureLabel, Volume

Voxel = Tuple[int, int, int]


def _used_axes(dimensionality: Dimensionality) -> Tuple[int, ...]:
    return (0, 1) if dimensionality == Dimensionality.TWO_D else (0, 1, 2)


def footprint_in_bounds(dims: Sequence[int], center: Voxel, spec: PatchSpec) -> bool:
    """判断中心处的足迹是否完全位于体数据内"""
    if any(not 0 <= c < n for c, n in zip(center, dims)):
        return False
    for axis in _used_axes(spec.dimensionality):
        start = center[axis] - spec.half
        if start < 0 or start + spec.size_px > dims[axis]:
            return False
    return True


def in_bounds_mask(dims: Sequence[int], centers: np.ndarray, spec: PatchSpec) -> np.ndarray:
    """向量化版本：(M, 3) 中心数组 -> (M,) 布尔数组"""
    centers = np.asarray(centers, dtype=np.int64).reshape(-1, 3)
    ok = np.all((centers >= 0) & (centers < np.asarray(dims)), axis=1)
    for axis in _used_axes(spec.dimensionality):
        start = centers[:, axis] - spec.half
        ok &= (start >= 0) & (start + spec.size_px <= dims[axis])
    return ok


def _require_in_bounds(dims, center: Voxel, spec: PatchSpec) -> Tuple[int, int, int]:
    if not footprint_in_bounds(dims, center, spec):
        raise FootprintOutOfBoundsError(
            f"中心 {tuple(center)} 处的 {spec.dimensionality.value} 足迹 (N={spec.size_px}) "
            f"超出体数据 {tuple(dims)}"
        )
    i, j, k = (int(c) for c in center)
    return i, j, k


def extract_patch(volume: Volume, center: Voxel, spec: PatchSpec) -> np.ndarray:
    """
    提取以 center 为中心的 patch（float32 HU）。

    Args:
        volume: CT 体数据
        center: 中心体素 (i, j, k)，位于张量各轴下标 ⌊N/2⌋ 处
        spec: patch 规格

    Returns:
        2D (N, N)；2.5D (N, N, 3)，通道依次为轴位、冠状、矢状；3D (N, N, N)

    Raises:
        FootprintOutOfBoundsError: 足迹超出边界
    """
    i, j, k = _require_in_bounds(volume.dims, center, spec)
    n, h = spec.size_px, spec.half
    i0, j0, k0 = i - h, j - h, k - h
    data = volume.data

    if spec.dimensionality == Dimensionality.TWO_D:
        patch = data[i0:i0 + n, j0:j0 + n, k]
    elif spec.dimensionality == Dimensionality.TWO_HALF_D:
        axial = data[i0:i0 + n, j0:j0 + n, k]
        coronal = data[i0:i0 + n, j, k0:k0 + n]
        sagittal = data[i, j0:j0 + n, k0:k0 + n]
        patch = np.stack([axial, coronal, sagittal], axis=-1)
    else:
        patch = data[i0:i0 + n, j0:j0 + n, k0:k0 + n]
    return np.ascontiguousarray(patch, dtype=np.float32)


def _union_footprint(n: int) -> np.ndarray:
    h = n // 2
    fp = np.zeros((n, n, n), dtype=bool)
    fp[:, :, h] = True
    fp[:, h, :] = True
    fp[h, :, :] = True
    return fp


def fill_factor(mask: LabelMask, center: Voxel, spec: PatchSpec, label: TextureLabel) -> float:
    """
    计算足迹中标注为 label 的体素占比（逐体素枚举）。

    Raises:
        FootprintOutOfBoundsError: 足迹超出边界
    """
    i, j, k = _require_in_bounds(mask.dims, center, spec)
    n, h = spec.size_px, spec.half
    i0, j0, k0 = i - h, j - h, k - h
    hit = mask.codes == int(label)

    if spec.dimensionality == Dimensionality.TWO_D:
        count = int(np.count_nonzero(hit[i0:i0 + n, j0:j0 + n, k]))
    elif spec.dimensionality == Dimensionality.TWO_HALF_D:
        cube = hit[i0:i0 + n, j0:j0 + n, k0:k0 + n]
        count = int(np.count_nonzero(cube & _union_footprint(n)))
    else:
        count = int(np.count_nonzero(hit[i0:i0 + n, j0:j0 + n, k0:k0 + n]))
    return count / spec.footprint_size


def _box_count(indicator: np.ndarray, size: Tuple[int, int, int]) -> np.ndarray:
    mean = ndimage.uniform_filter(indicator, size=size, mode="constant", cval=0.0)
    return np.rint(mean * float(np.prod(size))).astype(np.int64)


def footprint_label_counts(codes: np.ndarray, label: TextureLabel, spec: PatchSpec) -> np.ndarray:
    """
    对每个体素计算以其为中心的足迹内 label 体素数（盒式滤波）。

    只有足迹在界内的位置有意义；2.5D 以容斥原理合成三平面并集计数。

    Returns:
        与 codes 同形状的 int64 计数数组
    """
    n = spec.size_px
    indicator = (codes == int(label)).astype(np.float64)

    if spec.dimensionality == Dimensionality.TWO_D:
        return _box_count(indicator, (n, n, 1))
    if spec.dimensionality == Dimensionality.THREE_D:
        return _box_count(indicator, (n, n, n))

    planes = (
        _box_count(indicator, (n, n, 1))
        + _box_count(indicator, (n, 1, n))
        + _box_count(indicator, (1, n, n))
    )
    lines = (
        _box_count(indicator, (n, 1, 1))
        + _box_count(indicator, (1, n, 1))
        + _box_count(indicator, (1, 1, n))
    )
    return planes - lines + indicator.astype(np.int64)
