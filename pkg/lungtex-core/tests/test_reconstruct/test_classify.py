"""
滑动窗口重建测试

INPUT:  lungtex.reconstruct.classify 模块
OUTPUT: 验证网格原点、肺体素全覆盖、边界钳制与分类器输出校验的测试用例
POS:    确保类别图的非零区域恰为肺
"""

from typing import List

import numpy as np
import pytest

from lungtex import LungTexConfig, set_config
from lungtex.atlas import Dimensionality
from lungtex.errors import GridMismatchError, InputValidationError
from lungtex.reconstruct import PatchClassifier, ReconstructionConfig, classify_volume, grid_origins, quantify
from lungtex.volume import LungMask, TextureLabel

from tests.conftest import TEXTURE_HU, make_slab_scan

# 步长覆盖小于、等于、大于 patch 尺寸以及各轴不等的情形
VARIED_STRIDES = [(8, 8, 1), (4, 4, 4), (3, 5, 2), (1, 1, 1), (2, 7, 3), (5, 2, 6), (16, 16, 6), (6, 3, 1)]


class CenterHuClassifier:
    """按 patch 中心 HU 最接近的纹理基准值分类的桩分类器"""

    def __init__(self, size_px: int = 4, dimensionality: str = "2D"):
        self._size = size_px
        self._dim = Dimensionality.parse(dimensionality)
        self.batches: List[int] = []

    @property
    def input_size_px(self) -> int:
        return self._size

    @property
    def dimensionality(self) -> Dimensionality:
        return self._dim

    def predict_proba(self, tensors: np.ndarray) -> np.ndarray:
        self.batches.append(len(tensors))
        h = self._size // 2
        centers = tensors[(slice(None), h, h) + ((h,) if self._dim != Dimensionality.TWO_D else ())]
        centers = np.asarray(centers).reshape(len(tensors), -1)[:, 0]
        bases = np.array([TEXTURE_HU[label] for label in TextureLabel], dtype=np.float64)
        nearest = np.abs(centers[:, None] - bases[None, :]).argmin(axis=1)
        return np.eye(5)[nearest]


def _lung(dims, region=None) -> LungMask:
    membership = np.zeros(dims, dtype=bool)
    if region is None:
        membership[...] = True
    else:
        membership[region] = True
    return LungMask(membership=membership, spacing=(1.0, 1.0, 1.0))


@pytest.mark.unit
class TestGridOrigins:
    """测试网格原点"""

    def test_anchored_at_lung_bounding_box(self):
        """原点从肺包围盒最小角开始按步长排列"""
        lung = _lung((20, 20, 4), (slice(3, 12), slice(5, 6), slice(1, 2)))
        origins = grid_origins(lung, (4, 4, 1))
        assert origins.tolist() == [[3, 5, 1], [7, 5, 1], [11, 5, 1]]

    def test_empty_blocks_skipped(self):
        """与肺不相交的块不保留"""
        membership = np.zeros((16, 8, 1), dtype=bool)
        membership[0, 0, 0] = membership[15, 0, 0] = True
        origins = grid_origins(LungMask(membership, (1, 1, 1)), (4, 4, 1))
        assert origins.tolist() == [[0, 0, 0], [12, 0, 0]]


@pytest.mark.unit
class TestClassifyVolume:
    """测试重建"""

    def test_stub_satisfies_protocol(self):
        """桩分类器满足 PatchClassifier 协议"""
        assert isinstance(CenterHuClassifier(), PatchClassifier)

    def test_slab_reconstruction_is_exact(self, slab_scan, full_lung):
        """板宽与步长一致时类别图与真值完全相同"""
        volume, labels = slab_scan
        result = classify_volume(CenterHuClassifier(), volume, full_lung)

        assert result.patch_count == 5 * 2 * 6
        np.testing.assert_array_equal(result.codes, labels.codes)

    def test_single_block_lung(self, slab_scan):
        """8×8×1 的肺只分类一个 patch"""
        volume, _ = slab_scan
        lung = _lung(volume.dims, (slice(0, 8), slice(0, 8), slice(2, 3)))
        result = classify_volume(CenterHuClassifier(), volume, lung)

        assert result.patch_count == 1
        assert np.count_nonzero(result.codes) == 64
        assert set(np.unique(result.codes)) == {0, int(TextureLabel.NORMAL)}

    @pytest.mark.parametrize("seed", range(20))
    def test_every_lung_voxel_covered(self, seed):
        """任意形状的肺、不同步长：非零体素恰为肺体素，定量体积之和为肺体积、百分比之和为 100"""
        rng = np.random.default_rng(seed)
        stride = VARIED_STRIDES[seed % len(VARIED_STRIDES)]
        volume, _ = make_slab_scan(spacing=(0.7, 0.7, 1.5))
        lung = LungMask(membership=rng.random(volume.dims) < rng.uniform(0.05, 0.6), spacing=volume.spacing)

        result = classify_volume(CenterHuClassifier(), volume, lung, ReconstructionConfig(stride=stride))
        np.testing.assert_array_equal(result.codes > 0, lung.membership)

        report = quantify(result, lung, scan_id=f"seed{seed}")
        lung_ml = lung.voxel_count * lung.voxel_volume_ml
        assert sum(report.volumes_ml.values()) == pytest.approx(lung_ml, rel=1e-9)
        assert report.total_lung_ml == pytest.approx(lung_ml, rel=1e-9)
        assert sum(report.percentages.values()) == pytest.approx(100.0, abs=0.01)

    def test_edge_centers_are_clamped(self, slab_scan):
        """贴边的肺体素也能分类（patch 中心向内钳制）"""
        volume, _ = slab_scan
        lung = _lung(volume.dims, (slice(39, 40), slice(15, 16), slice(5, 6)))
        result = classify_volume(CenterHuClassifier(), volume, lung)
        assert result.codes[39, 15, 5] == int(TextureLabel.EMPHYSEMA)

    def test_three_d_model(self, slab_scan, full_lung):
        """3D 分类器使用立方体 patch"""
        volume, labels = slab_scan
        result = classify_volume(CenterHuClassifier(4, "3D"), volume, full_lung,
                                 ReconstructionConfig(stride=(8, 8, 2)))
        np.testing.assert_array_equal(result.codes, labels.codes)

    def test_batch_size(self, slab_scan, full_lung):
        """按批调用分类器，结果与批大小无关"""
        volume, _ = slab_scan
        small, large = CenterHuClassifier(), CenterHuClassifier()
        a = classify_volume(small, volume, full_lung, ReconstructionConfig(batch_size=7))
        set_config(LungTexConfig(inference_batch_size=1000))
        b = classify_volume(large, volume, full_lung)

        assert max(small.batches) == 7 and sum(small.batches) == 60
        assert large.batches == [60]
        np.testing.assert_array_equal(a.codes, b.codes)

    def test_empty_lung(self, slab_scan):
        """空肺掩膜"""
        volume, _ = slab_scan
        with pytest.raises(InputValidationError, match="肺掩膜为空"):
            classify_volume(CenterHuClassifier(), volume, _lung(volume.dims, (slice(0, 0),)))

    def test_model_larger_than_volume(self, slab_scan, full_lung):
        """模型输入尺寸超出体数据"""
        volume, _ = slab_scan
        with pytest.raises(InputValidationError, match="超出"):
            classify_volume(CenterHuClassifier(32), volume, full_lung)

    def test_grid_mismatch(self, slab_scan):
        """肺掩膜网格不一致"""
        volume, _ = slab_scan
        with pytest.raises(GridMismatchError):
            classify_volume(CenterHuClassifier(), volume, _lung((8, 8, 8)))

    def test_bad_classifier_output(self, slab_scan, full_lung):
        """分类器输出形状不符"""

        class Broken(CenterHuClassifier):
            def predict_proba(self, tensors):
                return np.zeros((len(tensors), 4))

        volume, _ = slab_scan
        with pytest.raises(InputValidationError, match="输出形状"):
            classify_volume(Broken(), volume, full_lung)

    @pytest.mark.parametrize("stride", [(0, 8, 1), (8, 8)])
    def test_invalid_stride(self, stride):
        """步长必须为 3 个正整数"""
        with pytest.raises(InputValidationError):
            ReconstructionConfig(stride=stride)
