"""
阈值肺掩膜（后备方案）

INPUT:  Volume, HU 阈值, 最小连通域体素数
OUTPUT: threshold_lung_mask() 函数
POS:    未提供外部肺分割时的肺掩膜来源，被 CLI (atlas / classify) 调用
"""

import logging
from typing import Optional

import numpy as np
from scipy import ndimage

from lungtex.config import get_config
from lungtex.volume.types import LungMask, Volume

# 设置日志
logger = logging.getLogger(__name__)


def threshold_lung_mask(
    volume: Volume,
    hu_threshold: Optional[float] = None,
    min_component_voxels: Optional[int] = None,
) -> LungMask:
    """
    以 HU 阈值生成肺掩膜。

    保留 HU < 阈值的体素中，属于 6-连通且体素数 >= min_component_voxels、
    并且不接触体数据边界（即不属于体外空气）的连通域。

    Args:
        volume: CT 体数据
        hu_threshold: HU 阈值，默认取配置 lung_hu_threshold (-320)
        min_component_voxels: 最小连通域体素数，默认取配置 (10000)

    Returns:
        LungMask，可能为空
    """
    config = get_config()
    if hu_threshold is None:
        hu_threshold = config.lung_hu_threshold
    if min_component_voxels is None:
        min_component_voxels = config.lung_min_component_voxels

    air = volume.data < hu_threshold
    structure = ndimage.generate_binary_structure(3, 1)
    labels, n_components = ndimage.label(air, structure=structure)

    if n_components == 0:
        logger.info("阈值肺掩膜: 未找到低密度区域")
        return LungMask(membership=np.zeros(volume.dims, dtype=bool), spacing=volume.spacing)

    sizes = np.bincount(labels.ravel(), minlength=n_components + 1)
    keep = sizes >= min_component_voxels

    # 接触边界的连通域为体外空气
    border = np.concatenate([
        labels[0].ravel(), labels[-1].ravel(),
        labels[:, 0].ravel(), labels[:, -1].ravel(),
        labels[:, :, 0].ravel(), labels[:, :, -1].ravel(),
    ])
    keep[np.unique(border)] = False
    keep[0] = False

    membership = keep[labels]
    logger.info(
        f"阈值肺掩膜: {n_components} 个低密度连通域，保留 {int(keep.sum())} 个，"
        f"共 {int(membership.sum())} 体素"
    )
    return LungMask(membership=membership, spacing=volume.spacing)
