"""
肺实质定量

INPUT:  ClassificationMap（或 LabelMask）, LungMask
OUTPUT: QuantReport 类, quantify(), reports_to_frame() 函数, QUANT_COLUMNS 常量
POS:    reconstruct-quantify 的第二步：每类体积 (ml) 与占肺百分比

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Union

import numpy as np
import pandas as pd

from lungtex.errors import InputValidationError
from lungtex.reconstruct.classify import ClassificationMap
from lungtex.volume.types import LabelMask, LungMask, TextureLabel, check_congruent

logger = logging.getLogger(__name__)

QUANT_COLUMNS = ["scan_id", "total_ml"] + [f"{label.column}_pct" for label in TextureLabel] + ["fibrosis_pct"]

# 纤维化复合指标 = 带网格影的磨玻璃 + 蜂窝
FIBROSIS_CLASSES = (TextureLabel.GGR, TextureLabel.HONEYCOMBING)


@dataclass
class QuantReport:
    """
    单个扫描的定量结果

    Attributes:
        scan_id: 扫描 ID
        lung_voxels: 肺体素数
        total_lung_ml: 肺总体积 (ml)
        volumes_ml: 每类体积 (ml)
        percentages: 每类占肺百分比
        fibrosis_pct: GGR% + 蜂窝%
    """

    scan_id: str
    lung_voxels: int
    total_lung_ml: float
    volumes_ml: Dict[TextureLabel, float] = field(default_factory=dict)
    percentages: Dict[TextureLabel, float] = field(default_factory=dict)
    fibrosis_pct: float = 0.0

    def pct(self, label: TextureLabel) -> float:
        return self.percentages[label]

    def to_dict(self) -> dict:
        return {
            "scan_id": self.scan_id,
            "lung_voxels": self.lung_voxels,
            "total_ml": self.total_lung_ml,
            "classes": {
                label.column: {"volume_ml": self.volumes_ml[label], "pct": self.percentages[label]}
                for label in TextureLabel
            },
            "fibrosis_pct": self.fibrosis_pct,
        }

    def to_row(self) -> dict:
        row = {"scan_id": self.scan_id, "total_ml": self.total_lung_ml}
        row.update({f"{label.column}_pct": self.percentages[label] for label in TextureLabel})
        row["fibrosis_pct"] = self.fibrosis_pct
        return row


def quantify(
    classification: Union[ClassificationMap, LabelMask],
    lung: LungMask,
    scan_id: str = "",
) -> QuantReport:
    """
    计算每类体积与百分比。

    pct_c = 100·|c 类体素| / |肺体素|；体积 = 体素数·sx·sy·sz / 1000 ml。

    Raises:
        InputValidationError: 肺为空、网格不一致，或类别图的非零区域与肺掩膜不一致
    """
    labels = classification.labels if isinstance(classification, ClassificationMap) else classification
    check_congruent(lung, labels, "类别图")
    n_lung = lung.voxel_count
    if n_lung == 0:
        raise InputValidationError(f"扫描 {scan_id or '?'} 的肺掩膜为空")
    if not np.array_equal(labels.codes > 0, lung.membership):
        raise InputValidationError(f"扫描 {scan_id or '?'} 的类别图非零区域与肺掩膜不一致")

    counts = np.bincount(labels.codes.ravel(), minlength=len(TextureLabel) + 1)
    voxel_ml = lung.voxel_volume_ml
    volumes = {label: float(counts[label]) * voxel_ml for label in TextureLabel}
    percentages = {label: 100.0 * float(counts[label]) / n_lung for label in TextureLabel}
    report = QuantReport(
        scan_id=scan_id,
        lung_voxels=int(n_lung),
        total_lung_ml=float(n_lung) * voxel_ml,
        volumes_ml=volumes,
        percentages=percentages,
        fibrosis_pct=sum(percentages[label] for label in FIBROSIS_CLASSES),
    )
    logger.info(
        f"定量 {scan_id}: 肺 {report.total_lung_ml:.1f} ml, "
        + ", ".join(f"{label.column} {percentages[label]:.1f}%" for label in TextureLabel)
    )
    return report


def reports_to_frame(reports: Sequence[QuantReport]) -> pd.DataFrame:
    """QuantReport 列表 -> CSV 表 (scan_id, total_ml, 五类 pct, fibrosis_pct)"""
    rows: List[dict] = [report.to_row() for report in reports]
    return pd.DataFrame(rows, columns=QUANT_COLUMNS)
