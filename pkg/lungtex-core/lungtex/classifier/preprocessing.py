"""
Patch 预处理：强度归一化与数据增强

INPUT:  HU patch 张量, AugmentConfig, numpy 随机流
OUTPUT: normalize_patch(), AugmentParams, draw_augment_params(), transform_plane(),
        apply_augmentation(), augment() 函数
POS:    训练与推理共用的输入变换，被 training 与 inference 调用

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import ndimage

from lungtex.atlas.spec import Dimensionality
from lungtex.classifier.config import AugmentConfig
from lungtex.config import get_config


def normalize_patch(
    tensor: np.ndarray,
    hu_min: Optional[float] = None,
    hu_max: Optional[float] = None,
) -> np.ndarray:
    """
    将 HU 线性映射到 [0, 1] 并截断。

    v' = clamp((v - hu_min) / (hu_max - hu_min), 0, 1)，窗口默认取配置 (-1024, 600)。

    Returns:
        float32 数组，形状不变
    """
    config = get_config()
    lo = config.hu_window_min if hu_min is None else hu_min
    hi = config.hu_window_max if hu_max is None else hu_max
    scaled = (np.asarray(tensor, dtype=np.float64) - lo) / (hi - lo)
    return np.clip(scaled, 0.0, 1.0).astype(np.float32)


@dataclass(frozen=True)
class AugmentParams:
    """单个样本的增强参数"""

    theta_deg: float = 0.0
    zoom: float = 1.0
    flips: Tuple[bool, ...] = ()


def _flip_axes(dimensionality: Dimensionality) -> Tuple[int, ...]:
    # 2D / 2.5D 只翻转面内两轴，3D 翻转全部三轴
    return (0, 1, 2) if dimensionality == Dimensionality.THREE_D else (0, 1)


def draw_augment_params(
    cfg: AugmentConfig, rng: np.random.Generator, dimensionality: Dimensionality
) -> AugmentParams:
    """按固定顺序（角度、缩放、翻转）从随机流中抽取增强参数"""
    theta = float(rng.uniform(*cfg.rotation_deg_range))
    zoom = float(rng.uniform(*cfg.zoom_range))
    flips = tuple(bool(f) for f in rng.random(len(_flip_axes(dimensionality))) < cfg.flip_probability)
    return AugmentParams(theta_deg=theta, zoom=zoom, flips=flips)


def _affine_matrix(theta_deg: float, zoom: float, ndim: int) -> np.ndarray:
    # 输出坐标 -> 输入坐标：先绕中心旋转 -θ，再缩放 1/zoom
    t = np.deg2rad(theta_deg)
    c, s = np.cos(t), np.sin(t)
    matrix = np.eye(ndim)
    matrix[:2, :2] = np.array([[c, s], [-s, c]])
    return matrix / zoom


def transform_plane(array: np.ndarray, theta_deg: float, zoom: float) -> np.ndarray:
    """
    绕中心做面内（前两轴）旋转与各向同性缩放。

    线性插值，支撑域外以边缘值复制填充，输出形状与输入一致。
    """
    if theta_deg == 0.0 and zoom == 1.0:
        return np.array(array, dtype=np.float32, copy=True)
    data = np.asarray(array, dtype=np.float64)
    matrix = _affine_matrix(theta_deg, zoom, data.ndim)
    center = (np.asarray(data.shape, dtype=np.float64) - 1.0) / 2.0
    offset = center - matrix @ center
    out = ndimage.affine_transform(data, matrix, offset=offset, order=1, mode="nearest")
    return out.astype(np.float32)


def apply_augmentation(
    tensor: np.ndarray, params: AugmentParams, dimensionality: Dimensionality
) -> np.ndarray:
    """
    按给定参数变换 patch。

    2D 直接变换；2.5D 对三个平面 (N, N, 3) 各自施加同一面内变换；
    3D 绕 z 轴旋转并三维各向同性缩放。
    """
    dimensionality = Dimensionality.parse(dimensionality)
    if dimensionality == Dimensionality.TWO_HALF_D:
        out = np.stack(
            [transform_plane(tensor[:, :, c], params.theta_deg, params.zoom) for c in range(tensor.shape[2])],
            axis=-1,
        )
    else:
        out = transform_plane(tensor, params.theta_deg, params.zoom)

    for axis, flip in zip(_flip_axes(dimensionality), params.flips):
        if flip:
            out = np.flip(out, axis=axis)
    return np.ascontiguousarray(out, dtype=np.float32)


def augment(
    tensor: np.ndarray,
    cfg: AugmentConfig,
    rng: np.random.Generator,
    dimensionality: Dimensionality,
) -> np.ndarray:
    """抽取随机参数并增强单个 patch；cfg.enabled 为 False 时原样返回"""
    if not cfg.enabled:
        return np.asarray(tensor, dtype=np.float32)
    params = draw_augment_params(cfg, rng, dimensionality)
    return apply_augmentation(tensor, params, dimensionality)
