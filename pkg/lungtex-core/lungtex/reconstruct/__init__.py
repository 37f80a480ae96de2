"""
重建与定量模块

INPUT:  无
OUTPUT: 滑动窗口重建、定量与临床关联的公共接口
POS:    reconstruct-quantify 模块入口
"""

from lungtex.reconstruct.classify import (
    DEFAULT_STRIDE,
    ClassificationMap,
    PatchClassifier,
    ReconstructionConfig,
    classify_volume,
    grid_origins,
)
from lungtex.reconstruct.clinical import (
    CLINICAL_COLUMNS,
    SEVERITY_GRADES,
    CorrelationResult,
    correlate_with_clinical,
    severity_bucket_summary,
    validate_clinical,
)
from lungtex.reconstruct.quantify import QUANT_COLUMNS, QuantReport, quantify, reports_to_frame

__all__ = [
    # 重建
    "DEFAULT_STRIDE",
    "PatchClassifier",
    "ReconstructionConfig",
    "ClassificationMap",
    "grid_origins",
    "classify_volume",
    # 定量
    "QUANT_COLUMNS",
    "QuantReport",
    "quantify",
    "reports_to_frame",
    # 临床关联
    "CLINICAL_COLUMNS",
    "SEVERITY_GRADES",
    "CorrelationResult",
    "validate_clinical",
    "severity_bucket_summary",
    "correlate_with_clinical",
]
