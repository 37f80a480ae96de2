"""
运行配置 Schema

INPUT:  pydantic, 运行配置 JSON
OUTPUT: RunConfig 及各分节模型 (PathsSection, PatchSection, ModelSection, TrainSection,
        AugmentSection, ReconstructionSection, GridSection, SplitSection, LungMaskSection,
        PhantomSection), load_run_config() 函数
POS:    CLI 的配置校验层：任何工作开始前校验整份配置，未知字段直接拒绝

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import json
from pathlib import Path
from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from lungtex.atlas.spec import PatchSpec
from lungtex.classifier.config import AugmentConfig, GridPoint, HyperGrid, ModelConfig, TrainConfig
from lungtex.errors import InputValidationError
from lungtex.reconstruct.classify import ReconstructionConfig
from lungtex.volume.types import TextureLabel

DimensionalityName = Literal["2D", "2.5D", "3D"]


class _Section(BaseModel):
    """所有分节共用：拒绝未知字段"""

    model_config = ConfigDict(extra="forbid")


# ============================================================
# 路径
# ============================================================

class PathsSection(_Section):
    """输入路径；为空时使用 --out 目录下的默认产物"""
    manifest: Optional[str] = Field(None, description="扫描清单 JSON，默认 <out>/manifest.json")
    model: Optional[str] = Field(None, description="权重文件，默认 <out>/model.tqwt")
    clinical: Optional[str] = Field(None, description="临床 CSV (scan_id, dlco_pct, emphysema_grade, fibrosis_grade)")
    probabilities: Optional[str] = Field(None, description="预先计算的概率 CSV，供 evaluate 使用")


# ============================================================
# Patch / 模型 / 训练
# ============================================================

class PatchSection(_Section):
    """patch 采样超参数"""
    size_px: int = Field(64, ge=4, description="patch 边长 N")
    dimensionality: DimensionalityName = Field("2.5D", description="2D / 2.5D / 3D")
    selection_radius_mm: float = Field(3.0, gt=0, description="排除椭球半径 (mm)")
    min_fill_factor: float = Field(0.625, gt=0, le=1, description="最小填充率 (0, 1]")
    patches_per_class: int = Field(10000, ge=1, description="每类请求数量")

    def to_spec(self, rng_seed: int) -> PatchSpec:
        return PatchSpec(rng_seed=rng_seed, **self.model_dump())


class ModelSection(_Section):
    """DenseNet 结构；block_layers 为空时按维度与尺寸取默认值"""
    block_layers: Optional[List[int]] = Field(None, description="每个 dense block 的层数")
    initial_filters: int = Field(64, ge=1)
    growth_rate: int = Field(32, ge=1)
    norm_momentum: float = Field(0.9, ge=0, lt=1)

    @field_validator("block_layers")
    @classmethod
    def validate_block_layers(cls, v: Optional[List[int]]) -> Optional[List[int]]:
        if v is not None and (not v or any(n < 1 for n in v)):
            raise ValueError("block_layers 必须非空且每项 >= 1")
        return v

    def overrides(self) -> Dict:
        return {
            "block_layers": tuple(self.block_layers) if self.block_layers else None,
            "initial_filters": self.initial_filters,
            "growth_rate": self.growth_rate,
            "norm_momentum": self.norm_momentum,
        }

    def to_model_config(self, spec: PatchSpec) -> ModelConfig:
        return ModelConfig.from_patch_spec(spec, **self.overrides())


class AugmentSection(_Section):
    rotation_deg_range: List[float] = Field([-15.0, 15.0], min_length=2, max_length=2)
    zoom_range: List[float] = Field([0.9, 1.1], min_length=2, max_length=2)
    flip_probability: float = Field(0.5, ge=0, le=1)
    enabled: bool = True

    @model_validator(mode="after")
    def validate_ranges(self) -> "AugmentSection":
        if self.rotation_deg_range[0] > self.rotation_deg_range[1]:
            raise ValueError("rotation_deg_range 下限大于上限")
        if not 0 < self.zoom_range[0] <= self.zoom_range[1]:
            raise ValueError("zoom_range 必须满足 0 < 下限 <= 上限")
        return self

    def to_augment_config(self) -> AugmentConfig:
        return AugmentConfig(
            rotation_deg_range=tuple(self.rotation_deg_range),
            zoom_range=tuple(self.zoom_range),
            flip_probability=self.flip_probability,
            enabled=self.enabled,
        )


class TrainSection(_Section):
    batch_size: int = Field(200, ge=1)
    patience_epochs: int = Field(60, ge=1)
    max_epochs: int = Field(300, ge=1)
    learning_rate: float = Field(0.01, gt=0)
    momentum: float = Field(0.9, ge=0, lt=1)

    @model_validator(mode="after")
    def validate_patience(self) -> "TrainSection":
        if self.patience_epochs > self.max_epochs:
            raise ValueError("patience_epochs 不能大于 max_epochs")
        return self


# ============================================================
# 重建 / 网格 / 划分
# ============================================================

class ReconstructionSection(_Section):
    stride: List[int] = Field([8, 8, 1], min_length=3, max_length=3, description="网格步长 (x, y, z)")
    batch_size: Optional[int] = Field(None, ge=1)

    @field_validator("stride")
    @classmethod
    def validate_stride(cls, v: List[int]) -> List[int]:
        if any(s < 1 for s in v):
            raise ValueError("stride 每项必须 >= 1")
        return v

    def to_reconstruction_config(self) -> ReconstructionConfig:
        return ReconstructionConfig(stride=tuple(self.stride), batch_size=self.batch_size)


class GridSection(_Section):
    """超参数网格，默认为桌面规模子集"""
    dimensionalities: List[DimensionalityName] = Field(["2D", "2.5D", "3D"], min_length=1)
    sizes: List[int] = Field([8, 16, 32], min_length=1)
    radii_mm: List[float] = Field([1.0, 3.0], min_length=1)
    fill_factors: List[float] = Field([0.5, 0.75], min_length=1)
    patches_per_class: List[int] = Field([300, 1000], min_length=1)
    folds: int = Field(5, ge=2)
    negative_control: bool = Field(False, description="额外加入一个标签随机置换的对照点")

    @field_validator("sizes")
    @classmethod
    def validate_sizes(cls, v: List[int]) -> List[int]:
        if any(s < 4 for s in v):
            raise ValueError("网格尺寸必须 >= 4")
        return v

    @field_validator("fill_factors")
    @classmethod
    def validate_fills(cls, v: List[float]) -> List[float]:
        if any(not 0 < f <= 1 for f in v):
            raise ValueError("填充率必须在 (0, 1] 内")
        return v

    def to_grid(self) -> HyperGrid:
        return HyperGrid(
            dimensionalities=tuple(self.dimensionalities),
            sizes=tuple(self.sizes),
            radii_mm=tuple(self.radii_mm),
            fill_factors=tuple(self.fill_factors),
            patches_per_class=tuple(self.patches_per_class),
        )

    def points(self) -> List[GridPoint]:
        points = self.to_grid().points()
        if self.negative_control:
            first = points[0]
            points.append(GridPoint(
                first.dimensionality, first.size_px, first.selection_radius_mm,
                first.min_fill_factor, first.patches_per_class, shuffle_labels=True,
            ))
        return points


class SplitSection(_Section):
    """扫描级划分：train / validation / test / external_test"""
    fractions: List[float] = Field([0.68, 0.14, 0.08, 0.10], min_length=2, max_length=4)
    use_pinned: bool = Field(True, description="清单中全部扫描都指定了 split 时直接使用")

    @field_validator("fractions")
    @classmethod
    def validate_fractions(cls, v: List[float]) -> List[float]:
        if any(f <= 0 for f in v) or abs(sum(v) - 1.0) > 1e-6:
            raise ValueError(f"划分比例必须为正且和为 1: {v}")
        return v


class LungMaskSection(_Section):
    """阈值肺掩膜（清单未提供肺掩膜时使用）；为空时沿用 lungtex-core 配置"""
    hu_threshold: Optional[float] = Field(None, description="HU 阈值，默认 -320")
    min_component_voxels: Optional[int] = Field(None, ge=1, description="最小连通域体素数，默认 10000")


# ============================================================
# 体模
# ============================================================

class PhantomSection(_Section):
    """
    合成体模队列：第 i 个扫描的分区比例为 compartments × 线性系数，
    系数从 severity_ramp[0] 变化到 severity_ramp[1]
    """
    count: int = Field(6, ge=1)
    dims: List[int] = Field([96, 96, 96], min_length=3, max_length=3)
    spacing: List[float] = Field([1.0, 1.0, 1.0], min_length=3, max_length=3)
    compartments: Dict[str, float] = Field(
        {"gg": 0.15, "ggr": 0.15, "honeycombing": 0.15, "emphysema": 0.15},
        description="纹理 -> 占肺比例（剩余为 normal）",
    )
    severity_ramp: List[float] = Field([0.5, 1.5], min_length=2, max_length=2)
    scan_prefix: str = Field("phantom", min_length=1)

    @field_validator("dims")
    @classmethod
    def validate_dims(cls, v: List[int]) -> List[int]:
        if any(n < 8 for n in v):
            raise ValueError("体模尺寸每轴必须 >= 8")
        return v

    @field_validator("spacing")
    @classmethod
    def validate_spacing(cls, v: List[float]) -> List[float]:
        if any(s <= 0 for s in v):
            raise ValueError("体素间距必须为正数")
        return v

    @field_validator("compartments")
    @classmethod
    def validate_compartments(cls, v: Dict[str, float]) -> Dict[str, float]:
        for name, fraction in v.items():
            if name.strip().upper() not in TextureLabel.__members__:
                raise ValueError(f"未知的纹理类别: {name}")
            if fraction < 0:
                raise ValueError(f"{name} 的比例不能为负数")
        return v

    @model_validator(mode="after")
    def validate_total(self) -> "PhantomSection":
        lo, hi = self.severity_ramp
        if lo < 0 or hi < 0:
            raise ValueError("severity_ramp 不能为负")
        if max(lo, hi) * sum(self.compartments.values()) > 1.0 + 1e-9:
            raise ValueError("按 severity_ramp 放大后的分区比例之和超过 1")
        return self

    def scan_ids(self) -> List[str]:
        return [f"{self.scan_prefix}_{i:03d}" for i in range(self.count)]

    def multiplier(self, index: int) -> float:
        lo, hi = self.severity_ramp
        if self.count == 1:
            return lo
        return lo + (hi - lo) * index / (self.count - 1)


# ============================================================
# 顶层
# ============================================================

class RunConfig(_Section):
    """一次运行的完整配置；所有随机性都来自 rng_seed"""
    rng_seed: int = Field(0, ge=0, lt=2 ** 64)
    paths: PathsSection = Field(default_factory=PathsSection)
    patch: PatchSection = Field(default_factory=PatchSection)
    model: ModelSection = Field(default_factory=ModelSection)
    train: TrainSection = Field(default_factory=TrainSection)
    augment: AugmentSection = Field(default_factory=AugmentSection)
    reconstruction: ReconstructionSection = Field(default_factory=ReconstructionSection)
    grid: GridSection = Field(default_factory=GridSection)
    split: SplitSection = Field(default_factory=SplitSection)
    lung_mask: LungMaskSection = Field(default_factory=LungMaskSection)
    phantom: PhantomSection = Field(default_factory=PhantomSection)

    def patch_spec(self) -> PatchSpec:
        return self.patch.to_spec(self.rng_seed)

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            augment=self.augment.to_augment_config(),
            rng_seed=self.rng_seed,
            **self.train.model_dump(),
        )


def load_run_config(path: Optional[Union[str, Path]], seed: Optional[int] = None) -> RunConfig:
    """
    读取并校验运行配置；path 为空时使用默认配置，seed 覆盖 rng_seed。

    Raises:
        pydantic.ValidationError: 配置不合法
        InputValidationError: 配置文件不存在或不是 JSON 对象
    """
    data = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise InputValidationError(f"运行配置不存在: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise InputValidationError(f"运行配置不是合法 JSON {path}: {e}") from e
        if not isinstance(data, dict):
            raise InputValidationError(f"运行配置顶层必须是对象: {path}")
    if seed is not None:
        data["rng_seed"] = seed
    return RunConfig.model_validate(data)
