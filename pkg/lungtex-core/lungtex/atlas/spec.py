"""
Patch 规格

INPUT:  patch 尺寸 / 维度 / 选择半径 / 最小填充率 / 每类数量 / 种子
OUTPUT: Dimensionality 枚举, PatchSpec 数据类, tensor_shape() 函数, 默认常量
POS:    patch-atlas 与 classifier 之间共享的采样超参数定义

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Any, Dict, Tuple

from lungtex.errors import InputValidationError


class Dimensionality(str, Enum):
    """patch 维度：2D 轴位平面、2.5D 三正交平面、3D 立方体"""

    TWO_D = "2D"
    TWO_HALF_D = "2.5D"
    THREE_D = "3D"

    @property
    def order(self) -> int:
        """排序用序号 2D < 2.5D < 3D"""
        return {"2D": 0, "2.5D": 1, "3D": 2}[self.value]

    @classmethod
    def parse(cls, value: Any) -> "Dimensionality":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise InputValidationError(f"未知的 patch 维度: {value!r}，可选 2D / 2.5D / 3D") from None


# 验证/测试 patch 的最小填充率固定为 0.5
EVALUATION_MIN_FILL = 0.5


@dataclass(frozen=True)
class PatchSpec:
    """
    patch 采样超参数

    Attributes:
        size_px: patch 边长 N（体素）
        dimensionality: 2D / 2.5D / 3D
        selection_radius_mm: 排除球半径 (mm)
        min_fill_factor: 足迹中目标纹理体素的最小占比，(0, 1]
        patches_per_class: 每类请求的 patch 数
        rng_seed: 采样种子
    """

    size_px: int = 64
    dimensionality: Dimensionality = Dimensionality.TWO_HALF_D
    selection_radius_mm: float = 3.0
    min_fill_factor: float = 0.625
    patches_per_class: int = 10000
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "dimensionality", Dimensionality.parse(self.dimensionality))
        if int(self.size_px) < 1:
            raise InputValidationError(f"size_px 必须 >= 1，当前为 {self.size_px}")
        if self.selection_radius_mm <= 0:
            raise InputValidationError(f"selection_radius_mm 必须 > 0，当前为 {self.selection_radius_mm}")
        if not 0 < self.min_fill_factor <= 1:
            raise InputValidationError(f"min_fill_factor 必须在 (0, 1] 内，当前为 {self.min_fill_factor}")
        if int(self.patches_per_class) < 1:
            raise InputValidationError(f"patches_per_class 必须 >= 1，当前为 {self.patches_per_class}")

    @property
    def half(self) -> int:
        """中心在各轴上的下标 ⌊N/2⌋"""
        return self.size_px // 2

    @property
    def tensor_shape(self) -> Tuple[int, ...]:
        return tensor_shape(self.size_px, self.dimensionality)

    @property
    def footprint_size(self) -> int:
        """足迹体素数；2.5D 为三平面并集 3N² - 3N + 1"""
        n = self.size_px
        if self.dimensionality == Dimensionality.TWO_D:
            return n * n
        if self.dimensionality == Dimensionality.TWO_HALF_D:
            return 3 * n * n - 3 * n + 1
        return n ** 3

    def for_evaluation(self) -> "PatchSpec":
        """验证/测试集使用的规格（最小填充率 0.5）"""
        return replace(self, min_fill_factor=EVALUATION_MIN_FILL)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["dimensionality"] = self.dimensionality.value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PatchSpec":
        return cls(**data)


def tensor_shape(size_px: int, dimensionality: Dimensionality) -> Tuple[int, ...]:
    """patch 张量形状：2D (N, N)，2.5D (N, N, 3)，3D (N, N, N)"""
    dimensionality = Dimensionality.parse(dimensionality)
    if dimensionality == Dimensionality.TWO_D:
        return (size_px, size_px)
    if dimensionality == Dimensionality.TWO_HALF_D:
        return (size_px, size_px, 3)
    return (size_px, size_px, size_px)


# 超参数搜索得到的最优规格（2.5D、64 像素、3 mm、0.625、最大 patch 数）
OPTIMAL_PATCH_SPEC = PatchSpec(
    size_px=64,
    dimensionality=Dimensionality.TWO_HALF_D,
    selection_radius_mm=3.0,
    min_fill_factor=0.625,
    patches_per_class=10000,
)
