"""
lungtex: 基于 patch 的肺实质纹理分类与定量

提供体数据 I/O、纹理图谱与 patch 采样、DenseNet 分类器、滑动窗口重建定量、
统计评估与合成体模的完整实现

INPUT:  无
OUTPUT: 所有公共 API
POS:    包入口
"""

__version__ = "0.1.0"

# 配置
from lungtex.config import (
    LungTexConfig,
    get_config,
    set_config,
    load_config,
    reset_config,
)

# 错误类型
from lungtex.errors import (
    LungTexError,
    InputValidationError,
    VolumeFormatError,
    GridMismatchError,
    FootprintOutOfBoundsError,
    InfeasibleSamplingError,
    ModelFileError,
    StatisticsInputError,
    ClinicalDataError,
)

# 体数据
from lungtex.volume import (
    TextureLabel,
    Volume,
    LabelMask,
    LungMask,
    load_volume,
    save_volume,
    mm_to_voxel_radius,
)

# 图谱与采样
from lungtex.atlas import (
    Dimensionality,
    PatchSpec,
    Atlas,
    AtlasManifest,
    PatchSet,
    build_atlas,
    extract_patch,
    fill_factor,
    sample_patches,
    split_patchset,
)

# 分类器
from lungtex.classifier import (
    ModelConfig,
    TrainConfig,
    AugmentConfig,
    HyperGrid,
    build_model,
    train,
    hyperparameter_search,
    save_model,
    load_model,
    TorchPatchClassifier,
)

# 重建与定量
from lungtex.reconstruct import (
    ReconstructionConfig,
    ClassificationMap,
    QuantReport,
    classify_volume,
    quantify,
    correlate_with_clinical,
)

# 体模
from lungtex.phantom import PhantomSpec, generate_phantom

__all__ = [
    # 版本
    "__version__",
    # 配置
    "LungTexConfig",
    "get_config",
    "set_config",
    "load_config",
    "reset_config",
    # 错误
    "LungTexError",
    "InputValidationError",
    "VolumeFormatError",
    "GridMismatchError",
    "FootprintOutOfBoundsError",
    "InfeasibleSamplingError",
    "ModelFileError",
    "StatisticsInputError",
    "ClinicalDataError",
    # 体数据
    "TextureLabel",
    "Volume",
    "LabelMask",
    "LungMask",
    "load_volume",
    "save_volume",
    "mm_to_voxel_radius",
    # 图谱
    "Dimensionality",
    "PatchSpec",
    "Atlas",
    "AtlasManifest",
    "PatchSet",
    "build_atlas",
    "extract_patch",
    "fill_factor",
    "sample_patches",
    "split_patchset",
    # 分类器
    "ModelConfig",
    "TrainConfig",
    "AugmentConfig",
    "HyperGrid",
    "build_model",
    "train",
    "hyperparameter_search",
    "save_model",
    "load_model",
    "TorchPatchClassifier",
    # 重建
    "ReconstructionConfig",
    "ClassificationMap",
    "QuantReport",
    "classify_volume",
    "quantify",
    "correlate_with_clinical",
    # 体模
    "PhantomSpec",
    "generate_phantom",
]
