"""
紧凑 DenseNet 分类网络

INPUT:  ModelConfig, torch.Generator（初始化）
OUTPUT: DenseLayer, DenseBlock, Transition, DenseNetClassifier 类, to_network_input() 函数
POS:    classifier 的模型定义，被 training / weights / inference 使用

结构：初始 3×3 卷积 -> dense block（每层 归一化 -> ReLU -> 3×3 卷积，输出 growth_rate
通道并与输入拼接）-> block 之间的 transition（归一化 -> ReLU -> 1×1 卷积减半通道 ->
2× 平均池化）-> 归一化 -> ReLU -> 全局平均池化 -> 5 路线性层。
2D 使用二维卷积；2.5D 以 3×N×N 的单通道体积输入三维网络；3D 使用三维卷积。

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import math
from typing import Dict, List, Union

import numpy as np
import torch
import torch.nn as nn

from lungtex.atlas.spec import Dimensionality, tensor_shape
from lungtex.classifier.config import ModelConfig
from lungtex.errors import InputValidationError


def _spatial_dims(config: ModelConfig) -> int:
    return 2 if config.dimensionality == Dimensionality.TWO_D else 3


def _layers(ndim: int):
    if ndim == 2:
        return nn.Conv2d, nn.BatchNorm2d, nn.AvgPool2d
    return nn.Conv3d, nn.BatchNorm3d, nn.AvgPool3d


class DenseLayer(nn.Module):
    """归一化 -> ReLU -> 3×3 卷积，输出 growth_rate 个新通道"""

    def __init__(self, in_channels: int, growth_rate: int, ndim: int, momentum: float):
        super().__init__()
        conv, norm, _ = _layers(ndim)
        self.norm = norm(in_channels, momentum=momentum)
        self.relu = nn.ReLU()
        self.conv = conv(in_channels, growth_rate, kernel_size=3, padding=1, bias=False)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.conv(self.relu(self.norm(x)))


class DenseBlock(nn.Module):
    """每层输出与此前全部特征拼接"""

    def __init__(self, num_layers: int, in_channels: int, growth_rate: int, ndim: int, momentum: float):
        super().__init__()
        self.layers = nn.ModuleList(
            DenseLayer(in_channels + i * growth_rate, growth_rate, ndim, momentum)
            for i in range(num_layers)
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        features = x
        for layer in self.layers:
            features = torch.cat([features, layer(features)], dim=1)
        return features


class Transition(nn.Module):
    """归一化 -> ReLU -> 1×1 卷积减半通道 -> 2× 平均池化"""

    def __init__(self, in_channels: int, out_channels: int, ndim: int, momentum: float):
        super().__init__()
        conv, norm, pool = _layers(ndim)
        self.norm = norm(in_channels, momentum=momentum)
        self.relu = nn.ReLU()
        self.conv = conv(in_channels, out_channels, kernel_size=1, bias=False)
        self.pool = pool(kernel_size=2, stride=2, ceil_mode=True)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.pool(self.conv(self.relu(self.norm(x))))


class DenseNetClassifier(nn.Module):
    """
    5 类 patch 分类网络

    Attributes:
        config: 模型配置
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        ndim = _spatial_dims(config)
        conv, norm, _ = _layers(ndim)
        # torch 的 momentum 是新批次统计量的权重
        momentum = 1.0 - config.norm_momentum

        self.stem = conv(1, config.initial_filters, kernel_size=3, padding=1, bias=False)
        blocks: List[nn.Module] = []
        channels = config.initial_filters
        for b, num_layers in enumerate(config.block_layers):
            blocks.append(DenseBlock(num_layers, channels, config.growth_rate, ndim, momentum))
            channels += num_layers * config.growth_rate
            if b != len(config.block_layers) - 1:
                blocks.append(Transition(channels, channels // 2, ndim, momentum))
                channels //= 2
        self.blocks = nn.Sequential(*blocks)
        self.head_norm = norm(channels, momentum=momentum)
        self.relu = nn.ReLU()
        self.classifier = nn.Linear(channels, config.num_classes)
        self.num_features = channels

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """网络输入 (B, 1, ...) -> logits (B, 5)"""
        x = self.blocks(self.stem(x))
        x = self.relu(self.head_norm(x))
        x = x.mean(dim=tuple(range(2, x.dim())))
        return self.classifier(x)

    @torch.no_grad()
    def initialize(self, generator: torch.Generator) -> None:
        """
        按固定顺序做 fan-in 缩放的均匀初始化。

        卷积: U(±sqrt(6 / fan_in))；线性层权重: U(±sqrt(1 / fan_in))，偏置为 0；
        归一化层缩放为 1、平移为 0，滑动统计量复位。
        """
        for module in self.modules():
            if isinstance(module, (nn.Conv2d, nn.Conv3d)):
                fan_in = module.weight[0].numel()
                bound = math.sqrt(6.0 / fan_in)
                module.weight.uniform_(-bound, bound, generator=generator)
            elif isinstance(module, nn.Linear):
                bound = math.sqrt(1.0 / module.in_features)
                module.weight.uniform_(-bound, bound, generator=generator)
                module.bias.zero_()
            elif isinstance(module, (nn.BatchNorm2d, nn.BatchNorm3d)):
                module.weight.fill_(1.0)
                module.bias.zero_()
                module.reset_running_stats()

    def named_tensors(self) -> Dict[str, torch.Tensor]:
        """全部参数与缓冲区（按 state_dict 顺序）"""
        return dict(self.state_dict())


def to_network_input(
    batch: Union[np.ndarray, torch.Tensor], config: ModelConfig, dtype: torch.dtype = torch.float32
) -> torch.Tensor:
    """
    将 patch 批次 (B, *tensor_shape) 转为网络输入。

    2D (B, N, N) -> (B, 1, N, N)；2.5D (B, N, N, 3) -> (B, 1, 3, N, N)；
    3D (B, N, N, N) -> (B, 1, N, N, N)

    Raises:
        InputValidationError: 形状与配置不符
    """
    x = torch.as_tensor(np.asarray(batch) if not isinstance(batch, torch.Tensor) else batch, dtype=dtype)
    expected = tensor_shape(config.input_size_px, config.dimensionality)
    if x.dim() != len(expected) + 1 or tuple(x.shape[1:]) != expected:
        raise InputValidationError(f"批次形状 {tuple(x.shape)} 与模型输入 (B, {expected}) 不符")
    if config.dimensionality == Dimensionality.TWO_HALF_D:
        x = x.permute(0, 3, 1, 2)
    return x.unsqueeze(1).contiguous()
