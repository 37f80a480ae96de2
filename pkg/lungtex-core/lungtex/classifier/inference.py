"""
推理适配器

INPUT:  DenseNetClassifier, HU patch 批次
OUTPUT: TorchPatchClassifier 类
POS:    把 torch 模型包装成重建模块使用的 patch 分类器接口（input_size_px / dimensionality /
        predict_proba），负责 HU 归一化与分批

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np

from lungtex.atlas.spec import Dimensionality
from lungtex.classifier.network import DenseNetClassifier
from lungtex.classifier.preprocessing import normalize_patch
from lungtex.classifier.training import configure_torch_runtime, forward
from lungtex.classifier.weights import load_model
from lungtex.config import get_config
from lungtex.volume.types import NUM_CLASSES

logger = logging.getLogger(__name__)


class TorchPatchClassifier:
    """
    HU patch -> 类别概率

    Attributes:
        model: 推理模式的 DenseNetClassifier
        batch_size: 单次前向的最大 patch 数
    """

    def __init__(self, model: DenseNetClassifier, batch_size: Optional[int] = None):
        self.model = model.eval()
        self.batch_size = batch_size or get_config().inference_batch_size

    @classmethod
    def from_file(cls, path: Union[str, Path], batch_size: Optional[int] = None) -> "TorchPatchClassifier":
        return cls(load_model(path), batch_size=batch_size)

    @property
    def input_size_px(self) -> int:
        return self.model.config.input_size_px

    @property
    def dimensionality(self) -> Dimensionality:
        return self.model.config.dimensionality

    def predict_proba(self, tensors: np.ndarray) -> np.ndarray:
        """
        Args:
            tensors: HU patch 批次 (B, *tensor_shape)

        Returns:
            (B, 5) float64 概率
        """
        tensors = np.asarray(tensors)
        if len(tensors) == 0:
            return np.zeros((0, NUM_CLASSES), dtype=np.float64)
        configure_torch_runtime()
        out = [
            forward(self.model, normalize_patch(tensors[start:start + self.batch_size]))
            for start in range(0, len(tensors), self.batch_size)
        ]
        return np.concatenate(out, axis=0)
