"""
分类器模块

INPUT:  无
OUTPUT: 模型配置、网络、预处理、训练、权重读写、推理与超参数搜索的公共接口
POS:    classifier 模块入口
"""

from lungtex.classifier.config import (
    AugmentConfig,
    GridPoint,
    HyperGrid,
    ModelConfig,
    TrainConfig,
    default_block_layers,
)
from lungtex.classifier.hypersearch import (
    DEFAULT_FOLDS,
    PointScore,
    SearchResult,
    assign_folds,
    hyperparameter_search,
)
from lungtex.classifier.inference import TorchPatchClassifier
from lungtex.classifier.network import DenseNetClassifier, to_network_input
from lungtex.classifier.preprocessing import (
    AugmentParams,
    apply_augmentation,
    augment,
    draw_augment_params,
    normalize_patch,
)
from lungtex.classifier.training import (
    EarlyStopping,
    EpochRecord,
    TrainResult,
    backward,
    build_model,
    forward,
    history_to_frame,
    make_optimizer,
    train,
    train_step,
)
from lungtex.classifier.weights import load_model, read_model_config, save_model

__all__ = [
    # 配置
    "ModelConfig",
    "AugmentConfig",
    "TrainConfig",
    "GridPoint",
    "HyperGrid",
    "default_block_layers",
    # 网络
    "DenseNetClassifier",
    "to_network_input",
    # 预处理
    "normalize_patch",
    "AugmentParams",
    "draw_augment_params",
    "apply_augmentation",
    "augment",
    # 训练
    "build_model",
    "forward",
    "backward",
    "make_optimizer",
    "train_step",
    "EarlyStopping",
    "EpochRecord",
    "TrainResult",
    "train",
    "history_to_frame",
    # 权重
    "save_model",
    "load_model",
    "read_model_config",
    # 推理与搜索
    "TorchPatchClassifier",
    "DEFAULT_FOLDS",
    "PointScore",
    "SearchResult",
    "assign_folds",
    "hyperparameter_search",
]
