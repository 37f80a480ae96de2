"""
classifier 测试共享 fixtures

INPUT:  lungtex.classifier
OUTPUT: tiny_config, tiny_model fixtures
POS:    为网络、训练与权重测试提供小模型
"""

import pytest

from lungtex.classifier import ModelConfig, build_model


@pytest.fixture
def tiny_config() -> ModelConfig:
    """N=4 的 2D 单 block 小模型配置"""
    return ModelConfig(dimensionality="2D", input_size_px=4, block_layers=(1,), initial_filters=4, growth_rate=2)


@pytest.fixture
def tiny_model(tiny_config):
    """以种子 0 初始化的小模型"""
    return build_model(tiny_config, seed=0)
