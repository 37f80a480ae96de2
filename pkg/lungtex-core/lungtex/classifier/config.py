"""
分类器配置

INPUT:  PatchSpec, 超参数
OUTPUT: ModelConfig, AugmentConfig, TrainConfig, GridPoint, HyperGrid 数据类,
        default_block_layers() 函数
POS:    classifier 模块的参数定义，被 network / training / hypersearch / CLI schema 使用

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

from dataclasses import asdict, dataclass, field
from itertools import product
from typing import Any, Dict, List, Optional, Tuple

from lungtex.atlas.spec import Dimensionality, PatchSpec
from lungtex.errors import InputValidationError
from lungtex.volume.types import NUM_CLASSES


def default_block_layers(dimensionality: Dimensionality, size_px: int) -> Tuple[int, ...]:
    """
    每个 dense block 的层数。

    2D: (6, 12, 24, 16)；2.5D: (24,)；
    3D: N ∈ [5, 12] 为 (6, 24)，N ∈ [13, 32] 为 (6, 24, 16)，其余为 (6, 12, 24, 16)
    """
    dimensionality = Dimensionality.parse(dimensionality)
    if dimensionality == Dimensionality.TWO_D:
        return (6, 12, 24, 16)
    if dimensionality == Dimensionality.TWO_HALF_D:
        return (24,)
    if 5 <= size_px <= 12:
        return (6, 24)
    if 13 <= size_px <= 32:
        return (6, 24, 16)
    return (6, 12, 24, 16)


@dataclass(frozen=True)
class ModelConfig:
    """
    紧凑 DenseNet 配置

    Attributes:
        dimensionality: 输入 patch 维度
        input_size_px: patch 边长 N
        block_layers: 每个 dense block 的层数，None 时按维度与尺寸取默认值
        initial_filters: 初始卷积滤波器数
        growth_rate: 每层新增通道数
        num_classes: 输出类别数（固定为 5）
        norm_momentum: 归一化层滑动平均保留率
    """

    dimensionality: Dimensionality = Dimensionality.TWO_HALF_D
    input_size_px: int = 64
    block_layers: Optional[Tuple[int, ...]] = None
    initial_filters: int = 64
    growth_rate: int = 32
    num_classes: int = NUM_CLASSES
    norm_momentum: float = 0.9

    def __post_init__(self):
        dimensionality = Dimensionality.parse(self.dimensionality)
        object.__setattr__(self, "dimensionality", dimensionality)
        if self.block_layers is None:
            object.__setattr__(self, "block_layers", default_block_layers(dimensionality, self.input_size_px))
        else:
            object.__setattr__(self, "block_layers", tuple(int(n) for n in self.block_layers))
        if not self.block_layers or any(n < 1 for n in self.block_layers):
            raise InputValidationError(f"block_layers 必须非空且每项 >= 1: {self.block_layers}")
        if self.input_size_px < 1:
            raise InputValidationError(f"input_size_px 必须 >= 1: {self.input_size_px}")
        if self.initial_filters < 1 or self.growth_rate < 1:
            raise InputValidationError("initial_filters 与 growth_rate 必须 >= 1")
        if self.num_classes != NUM_CLASSES:
            raise InputValidationError(f"输出层必须为 {NUM_CLASSES} 类，当前为 {self.num_classes}")
        if not 0 <= self.norm_momentum < 1:
            raise InputValidationError(f"norm_momentum 必须在 [0, 1) 内: {self.norm_momentum}")

    @classmethod
    def from_patch_spec(cls, spec: PatchSpec, **overrides: Any) -> "ModelConfig":
        """按 patch 规格构造，可覆盖 block_layers / initial_filters / growth_rate"""
        overrides = {k: v for k, v in overrides.items() if v is not None}
        return cls(dimensionality=spec.dimensionality, input_size_px=spec.size_px, **overrides)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["dimensionality"] = self.dimensionality.value
        data["block_layers"] = list(self.block_layers)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModelConfig":
        return cls(**data)


@dataclass(frozen=True)
class AugmentConfig:
    """数据增强：面内旋转、各向同性缩放、按轴翻转"""

    rotation_deg_range: Tuple[float, float] = (-15.0, 15.0)
    zoom_range: Tuple[float, float] = (0.9, 1.1)
    flip_probability: float = 0.5
    enabled: bool = True

    def __post_init__(self):
        lo, hi = self.rotation_deg_range
        if lo > hi:
            raise InputValidationError(f"rotation_deg_range 非法: {self.rotation_deg_range}")
        zlo, zhi = self.zoom_range
        if not 0 < zlo <= zhi:
            raise InputValidationError(f"zoom_range 非法: {self.zoom_range}")
        if not 0 <= self.flip_probability <= 1:
            raise InputValidationError(f"flip_probability 必须在 [0, 1] 内: {self.flip_probability}")


@dataclass(frozen=True)
class TrainConfig:
    """
    训练配置

    Attributes:
        batch_size: 批大小
        patience_epochs: 验证准确率未提升的容忍轮数
        max_epochs: 最大轮数
        learning_rate: 学习率
        momentum: SGD 动量
        augment: 增强配置
        rng_seed: 初始化 / 打乱 / 增强的种子
    """

    batch_size: int = 200
    patience_epochs: int = 60
    max_epochs: int = 300
    learning_rate: float = 0.01
    momentum: float = 0.9
    augment: AugmentConfig = field(default_factory=AugmentConfig)
    rng_seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise InputValidationError(f"batch_size 必须 >= 1: {self.batch_size}")
        if self.max_epochs < 1 or self.patience_epochs < 1:
            raise InputValidationError("max_epochs 与 patience_epochs 必须 >= 1")
        if self.patience_epochs > self.max_epochs:
            raise InputValidationError(
                f"patience_epochs ({self.patience_epochs}) 不能大于 max_epochs ({self.max_epochs})"
            )
        if self.learning_rate <= 0:
            raise InputValidationError(f"learning_rate 必须 > 0: {self.learning_rate}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class GridPoint:
    """超参数网格中的一个点；shuffle_labels 为阴性对照（训练标签随机置换）"""

    dimensionality: Dimensionality
    size_px: int
    selection_radius_mm: float
    min_fill_factor: float
    patches_per_class: int
    shuffle_labels: bool = False

    def __post_init__(self):
        object.__setattr__(self, "dimensionality", Dimensionality.parse(self.dimensionality))

    def to_patch_spec(self, rng_seed: int) -> PatchSpec:
        return PatchSpec(
            size_px=self.size_px,
            dimensionality=self.dimensionality,
            selection_radius_mm=self.selection_radius_mm,
            min_fill_factor=self.min_fill_factor,
            patches_per_class=self.patches_per_class,
            rng_seed=rng_seed,
        )

    def sort_key(self) -> Tuple:
        """平分时的次序：patch 数少、尺寸小、维度低者优先"""
        return (
            self.patches_per_class,
            self.size_px,
            self.dimensionality.order,
            self.selection_radius_mm,
            self.min_fill_factor,
            self.shuffle_labels,
        )

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["dimensionality"] = self.dimensionality.value
        return data


@dataclass(frozen=True)
class HyperGrid:
    """超参数网格，默认为完整网格；desk() 为桌面规模子集"""

    dimensionalities: Tuple[Dimensionality, ...] = (
        Dimensionality.TWO_D, Dimensionality.TWO_HALF_D, Dimensionality.THREE_D,
    )
    sizes: Tuple[int, ...] = (8, 16, 24, 32, 48, 64)
    radii_mm: Tuple[float, ...] = (1.0, 3.0, 5.0, 10.0)
    fill_factors: Tuple[float, ...] = (0.5, 0.625, 0.75, 0.875, 1.0)
    patches_per_class: Tuple[int, ...] = (300, 1000, 3000, 10000)

    def __post_init__(self):
        object.__setattr__(
            self, "dimensionalities", tuple(Dimensionality.parse(d) for d in self.dimensionalities)
        )
        for name in ("dimensionalities", "sizes", "radii_mm", "fill_factors", "patches_per_class"):
            if not getattr(self, name):
                raise InputValidationError(f"网格维度 {name} 不能为空")

    @classmethod
    def desk(cls) -> "HyperGrid":
        return cls(sizes=(8, 16, 32), radii_mm=(1.0, 3.0), fill_factors=(0.5, 0.75), patches_per_class=(300, 1000))

    def points(self) -> List[GridPoint]:
        return [
            GridPoint(dim, size, radius, fill, count)
            for dim, size, radius, fill, count in product(
                self.dimensionalities, self.sizes, self.radii_mm, self.fill_factors, self.patches_per_class
            )
        ]

    def __len__(self) -> int:
        return (
            len(self.dimensionalities) * len(self.sizes) * len(self.radii_mm)
            * len(self.fill_factors) * len(self.patches_per_class)
        )
