"""
分类器配置测试

INPUT:  lungtex.classifier.config 模块
OUTPUT: 验证默认结构、覆盖项、训练配置校验与超参数网格的测试用例
POS:    确保模型与搜索参数的约束
"""

import pytest

from lungtex.atlas import PatchSpec
from lungtex.classifier import GridPoint, HyperGrid, ModelConfig, TrainConfig, default_block_layers
from lungtex.errors import InputValidationError


@pytest.mark.unit
class TestModelConfig:
    """测试 ModelConfig"""

    @pytest.mark.parametrize("dimensionality,size,expected", [
        ("2D", 64, (6, 12, 24, 16)),
        ("2.5D", 64, (24,)),
        ("3D", 8, (6, 24)),
        ("3D", 24, (6, 24, 16)),
        ("3D", 48, (6, 12, 24, 16)),
    ])
    def test_default_block_layers(self, dimensionality, size, expected):
        """默认 block 层数随维度与尺寸变化"""
        assert default_block_layers(dimensionality, size) == expected
        assert ModelConfig(dimensionality=dimensionality, input_size_px=size).block_layers == expected

    def test_from_patch_spec_ignores_none(self):
        """None 覆盖项保留默认值"""
        spec = PatchSpec(size_px=16, dimensionality="3D")
        config = ModelConfig.from_patch_spec(spec, block_layers=None, growth_rate=8)
        assert config.input_size_px == 16
        assert config.block_layers == (6, 24, 16)
        assert config.growth_rate == 8

    def test_dict_round_trip(self):
        """to_dict / from_dict"""
        config = ModelConfig(dimensionality="2D", input_size_px=8, block_layers=[2, 3], initial_filters=4)
        data = config.to_dict()
        assert data["block_layers"] == [2, 3]
        assert ModelConfig.from_dict(data) == config

    @pytest.mark.parametrize("kwargs", [
        {"num_classes": 4},
        {"block_layers": ()},
        {"growth_rate": 0},
        {"norm_momentum": 1.0},
    ])
    def test_invalid(self, kwargs):
        """非法配置"""
        with pytest.raises(InputValidationError):
            ModelConfig(**kwargs)


@pytest.mark.unit
class TestTrainConfig:
    """测试 TrainConfig"""

    def test_defaults(self):
        """默认 batch 200、patience 60、最多 300 轮"""
        cfg = TrainConfig()
        assert (cfg.batch_size, cfg.patience_epochs, cfg.max_epochs) == (200, 60, 300)

    def test_patience_exceeds_max(self):
        """patience 大于 max_epochs"""
        with pytest.raises(InputValidationError, match="patience_epochs"):
            TrainConfig(patience_epochs=10, max_epochs=5)


@pytest.mark.unit
class TestHyperGrid:
    """测试超参数网格"""

    def test_full_grid_size(self):
        """完整网格 3 × 6 × 4 × 5 × 4 = 1440 个点"""
        grid = HyperGrid()
        assert len(grid) == 1440
        assert len(grid.points()) == 1440

    def test_desk_grid(self):
        """桌面网格 3 × 3 × 2 × 2 × 2 = 72 个点"""
        assert len(HyperGrid.desk().points()) == 72

    def test_empty_axis(self):
        """任一维度为空时拒绝"""
        with pytest.raises(InputValidationError):
            HyperGrid(sizes=())

    def test_sort_key_prefers_cheaper_points(self):
        """平分时 patch 数少、尺寸小、维度低者排在前面"""
        a = GridPoint("3D", 8, 1.0, 0.5, 300)
        b = GridPoint("2D", 16, 1.0, 0.5, 300)
        c = GridPoint("2D", 8, 1.0, 0.5, 1000)
        assert sorted([c, b, a], key=GridPoint.sort_key) == [a, b, c]

    def test_point_to_patch_spec(self):
        """网格点转换为 PatchSpec"""
        spec = GridPoint("2.5D", 32, 3.0, 0.625, 1000).to_patch_spec(rng_seed=4)
        assert spec == PatchSpec(size_px=32, dimensionality="2.5D", selection_radius_mm=3.0,
                                 min_fill_factor=0.625, patches_per_class=1000, rng_seed=4)
