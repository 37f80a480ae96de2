"""
坐标换算与网格一致性测试

INPUT:  lungtex.volume.geometry, lungtex.volume.types 模块
OUTPUT: 验证体素半径、排除椭球偏移与网格校验的测试用例
POS:    确保选择半径的体素化正确
"""

import numpy as np
import pytest

from lungtex.errors import GridMismatchError, InputValidationError
from lungtex.volume import (
    LabelMask,
    TextureLabel,
    Volume,
    check_congruent,
    ellipsoid_offsets,
    mm_to_voxel_radius,
)


@pytest.mark.unit
class TestVoxelRadius:
    """测试 mm -> 体素半径"""

    def test_anisotropic_spacing(self):
        """(0.75, 0.75, 1.25) mm 下 5 mm 对应 (6.667, 6.667, 4.0) 体素"""
        radii = mm_to_voxel_radius((0.75, 0.75, 1.25), 5.0)
        assert radii == pytest.approx((6.667, 6.667, 4.0), abs=1e-3)

    def test_non_positive_radius(self):
        """半径必须为正"""
        with pytest.raises(InputValidationError):
            mm_to_voxel_radius((1.0, 1.0, 1.0), 0.0)


@pytest.mark.unit
class TestEllipsoidOffsets:
    """测试排除椭球的整数偏移"""

    def test_unit_sphere(self):
        """半径 1 的球只含原点与 6 个轴向邻居"""
        offsets = ellipsoid_offsets((1.0, 1.0, 1.0))
        assert len(offsets) == 7
        assert {tuple(o) for o in offsets} == {
            (0, 0, 0), (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1),
        }

    def test_all_offsets_inside(self):
        """所有偏移满足 Σ(Δ/r)² <= 1"""
        radii = (2.5, 2.5, 1.5)
        offsets = ellipsoid_offsets(radii)
        d2 = np.sum((offsets / np.asarray(radii)) ** 2, axis=1)
        assert np.all(d2 <= 1.0)
        assert (2, 0, 0) in {tuple(o) for o in offsets}
        assert (0, 0, 2) not in {tuple(o) for o in offsets}


@pytest.mark.unit
class TestGridTypes:
    """测试网格类型与一致性校验"""

    def test_voxel_volume_ml(self):
        """体素体积 = sx·sy·sz / 1000 ml"""
        volume = Volume(data=np.zeros((2, 2, 2)), spacing=(0.5, 0.5, 2.0))
        assert volume.voxel_volume_ml == pytest.approx(0.0005)

    def test_arrays_are_read_only(self):
        """构造后的数组不可写"""
        labels = LabelMask(codes=np.ones((2, 2, 2)), spacing=(1, 1, 1))
        with pytest.raises(ValueError):
            labels.codes[0, 0, 0] = 2

    def test_mismatched_spacing(self):
        """间距不同视为不一致"""
        volume = Volume(data=np.zeros((2, 2, 2)), spacing=(1, 1, 1))
        labels = LabelMask(codes=np.zeros((2, 2, 2)), spacing=(1, 1, 2))
        with pytest.raises(GridMismatchError):
            check_congruent(volume, labels)

    def test_two_dimensional_array_rejected(self):
        """只接受三维数组"""
        with pytest.raises(InputValidationError, match="三维"):
            Volume(data=np.zeros((4, 4)), spacing=(1, 1, 1))

    def test_texture_label_names(self):
        """标签名称大小写不敏感，编码 1..5"""
        assert TextureLabel.from_name("honeycombing") is TextureLabel.HONEYCOMBING
        assert [int(label) for label in TextureLabel] == [1, 2, 3, 4, 5]
        with pytest.raises(InputValidationError):
            TextureLabel.from_name("fog")
