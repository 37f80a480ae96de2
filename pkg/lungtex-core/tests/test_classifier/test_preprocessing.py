"""
预处理与数据增强测试

INPUT:  lungtex.classifier.preprocessing 模块
OUTPUT: 验证 HU 归一化、增强参数抽取与几何变换的测试用例
POS:    确保训练与推理共享的输入变换正确
"""

import numpy as np
import pytest

from lungtex import LungTexConfig, set_config
from lungtex.classifier import AugmentConfig, AugmentParams, apply_augmentation, augment, draw_augment_params, normalize_patch
from lungtex.rng import stream


@pytest.mark.unit
class TestNormalize:
    """测试 HU 归一化"""

    def test_default_window(self):
        """窗口 (-1024, 600)：-212 映射到 0.5，窗外截断"""
        out = normalize_patch(np.array([-212.0, -1024.0, 600.0, -2000.0, 3000.0]))
        np.testing.assert_allclose(out, [0.5, 0.0, 1.0, 0.0, 1.0])
        assert out.dtype == np.float32

    def test_window_from_config(self):
        """窗口取自全局配置"""
        set_config(LungTexConfig(hu_window_min=-1000, hu_window_max=0))
        np.testing.assert_allclose(normalize_patch(np.array([-500.0])), [0.5])


@pytest.mark.unit
class TestAugmentation:
    """测试数据增强"""

    def test_identity(self):
        """零旋转、单位缩放、无翻转时输出不变"""
        patch = np.arange(16, dtype=np.float32).reshape(4, 4)
        out = apply_augmentation(patch, AugmentParams(flips=(False, False)), "2D")
        np.testing.assert_array_equal(out, patch)

    def test_flips(self):
        """按轴翻转"""
        patch = np.arange(16, dtype=np.float32).reshape(4, 4)
        out = apply_augmentation(patch, AugmentParams(flips=(True, False)), "2D")
        np.testing.assert_array_equal(out, patch[::-1])

    def test_quarter_turn(self):
        """90° 旋转对正方形 patch 等于转置加翻转"""
        patch = np.arange(9, dtype=np.float32).reshape(3, 3)
        out = apply_augmentation(patch, AugmentParams(theta_deg=90.0), "2D")
        assert out.shape == (3, 3)
        assert out[1, 1] == pytest.approx(patch[1, 1])
        assert sorted(np.round(out.ravel()).tolist()) == sorted(patch.ravel().tolist())

    def test_two_half_d_planes_share_transform(self):
        """2.5D 三个平面施加同一面内变换"""
        plane = np.random.default_rng(0).random((6, 6)).astype(np.float32)
        patch = np.stack([plane, plane, plane], axis=-1)
        out = apply_augmentation(patch, AugmentParams(theta_deg=20.0, zoom=1.1, flips=(True, True)), "2.5D")
        assert out.shape == (6, 6, 3)
        np.testing.assert_allclose(out[..., 0], out[..., 2])

    def test_draws_are_reproducible(self):
        """同一随机流得到相同参数；3D 抽取三个翻转"""
        cfg = AugmentConfig()
        a = draw_augment_params(cfg, stream(1, "augment", 1), "3D")
        b = draw_augment_params(cfg, stream(1, "augment", 1), "3D")
        assert a == b
        assert len(a.flips) == 3
        assert -15.0 <= a.theta_deg <= 15.0 and 0.9 <= a.zoom <= 1.1

    def test_disabled(self):
        """禁用增强时原样返回"""
        patch = np.ones((4, 4), dtype=np.float32)
        out = augment(patch, AugmentConfig(enabled=False), stream(0, "augment"), "2D")
        np.testing.assert_array_equal(out, patch)
