"""
阈值肺掩膜测试

INPUT:  lungtex.volume.lung_mask 模块
OUTPUT: 验证阈值分割、连通域过滤与体外空气剔除的测试用例
POS:    确保未提供肺掩膜时的后备分割正确
"""

import numpy as np
import pytest

from lungtex import LungTexConfig, set_config
from lungtex.volume import Volume, threshold_lung_mask


def _chest(dims=(30, 30, 30)) -> np.ndarray:
    """体外空气包围软组织，软组织中有一个 10³ 的低密度块"""
    hu = np.full(dims, -1000, dtype=np.int16)
    hu[3:-3, 3:-3, 3:-3] = 40
    hu[10:20, 10:20, 10:20] = -850
    return hu


@pytest.mark.unit
class TestThresholdLungMask:
    """测试阈值肺掩膜"""

    def test_keeps_interior_air(self):
        """保留内部低密度连通域，剔除接触边界的体外空气"""
        volume = Volume(data=_chest(), spacing=(1, 1, 1))
        lung = threshold_lung_mask(volume, hu_threshold=-320, min_component_voxels=500)

        assert lung.voxel_count == 1000
        assert lung.membership[15, 15, 15]
        assert not lung.membership[0, 0, 0]

    def test_small_components_dropped(self):
        """小于最小体素数的连通域被剔除"""
        volume = Volume(data=_chest(), spacing=(1, 1, 1))
        lung = threshold_lung_mask(volume, hu_threshold=-320, min_component_voxels=1001)
        assert lung.voxel_count == 0

    def test_defaults_from_config(self):
        """未显式给出参数时取全局配置"""
        set_config(LungTexConfig(lung_min_component_voxels=2000))
        volume = Volume(data=_chest(), spacing=(1, 1, 1))
        assert threshold_lung_mask(volume).voxel_count == 0

    def test_no_low_density(self):
        """没有低于阈值的体素时返回空掩膜"""
        volume = Volume(data=np.zeros((5, 5, 5)), spacing=(1, 1, 1))
        assert threshold_lung_mask(volume).voxel_count == 0
