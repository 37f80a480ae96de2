"""
纹理体模规格

INPUT:  TextureLabel, 体模尺寸 / 间距 / 分区比例
OUTPUT: TextureParams, PhantomSpec 数据类, DEFAULT_TEXTURES 常量
POS:    phantom 生成器的输入定义，被 generator 与 CLI 使用

默认纹理参数只是为了再现放射学上定性的密度排序
(EMPHYSEMA < NORMAL < GG)，均为可调参数。
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from lungtex.errors import InputValidationError
from lungtex.volume.types import TextureLabel


@dataclass(frozen=True)
class TextureParams:
    """
    单一纹理的程序化参数

    Attributes:
        base_hu: 基底 HU
        noise_hu: 噪声幅度 (HU, 标准差)
        scale_vox: 结构尺度（平滑噪声 σ、网格周期或囊泡间距，单位体素）
        feature_hu: 叠加结构的 HU（网状线、囊壁、间隔），无结构时为 None
        feature_width_vox: 叠加结构的宽度（体素）；EMPHYSEMA 取平滑场的间隔带阈值
    """

    base_hu: float
    noise_hu: float
    scale_vox: float
    feature_hu: Optional[float] = None
    feature_width_vox: float = 1.0


DEFAULT_TEXTURES: Dict[TextureLabel, TextureParams] = {
    TextureLabel.NORMAL: TextureParams(base_hu=-850.0, noise_hu=25.0, scale_vox=0.7),
    TextureLabel.GG: TextureParams(base_hu=-650.0, noise_hu=40.0, scale_vox=2.0),
    TextureLabel.GGR: TextureParams(
        base_hu=-650.0, noise_hu=40.0, scale_vox=5.0, feature_hu=-250.0, feature_width_vox=1.0
    ),
    TextureLabel.HONEYCOMBING: TextureParams(
        base_hu=-900.0, noise_hu=20.0, scale_vox=6.0, feature_hu=-300.0, feature_width_vox=2.0
    ),
    TextureLabel.EMPHYSEMA: TextureParams(
        base_hu=-950.0, noise_hu=15.0, scale_vox=4.0, feature_hu=-800.0, feature_width_vox=0.08
    ),
}


@dataclass(frozen=True)
class PhantomSpec:
    """
    体模规格

    Attributes:
        dims: 体素尺寸 (nx, ny, nz)，建议 >= 64³
        spacing: 体素间距 (mm)
        compartments: (纹理, 占肺体积比例) 序列，按顺序连续分区，剩余部分为 NORMAL
        textures: 每类纹理参数
        rng_seed: 随机种子
        lung_semi_axes: 肺椭球半轴占各轴尺寸的比例
        body_semi_axes: 体部椭球半轴占各轴尺寸的比例
        body_hu: 软组织 HU
        air_hu: 体外空气 HU
    """

    dims: Tuple[int, int, int] = (96, 96, 96)
    spacing: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    compartments: Tuple[Tuple[TextureLabel, float], ...] = ()
    textures: Dict[TextureLabel, TextureParams] = field(default_factory=lambda: dict(DEFAULT_TEXTURES))
    rng_seed: int = 0
    lung_semi_axes: Tuple[float, float, float] = (0.40, 0.40, 0.40)
    body_semi_axes: Tuple[float, float, float] = (0.48, 0.48, 0.48)
    body_hu: float = 40.0
    air_hu: float = -1000.0

    def __post_init__(self):
        if len(self.dims) != 3 or any(int(n) < 1 for n in self.dims):
            raise InputValidationError(f"体模尺寸非法: {self.dims}")
        if len(self.spacing) != 3 or any(s <= 0 for s in self.spacing):
            raise InputValidationError(f"体模体素间距必须为正数: {self.spacing}")
        compartments = tuple((TextureLabel(label), float(frac)) for label, frac in self.compartments)
        object.__setattr__(self, "compartments", compartments)
        if any(frac < 0 for _, frac in compartments):
            raise InputValidationError("分区比例不能为负数")
        total = sum(frac for _, frac in compartments)
        if total > 1.0 + 1e-9:
            raise InputValidationError(f"分区比例之和 {total:.4f} 超过 1")
        missing = [label.name for label in TextureLabel if label not in self.textures]
        if missing:
            raise InputValidationError(f"缺少纹理参数: {missing}")
        if not all(0 < a <= b <= 0.5 for a, b in zip(self.lung_semi_axes, self.body_semi_axes)):
            raise InputValidationError("肺椭球必须位于体部椭球之内，且半轴比例不超过 0.5")
