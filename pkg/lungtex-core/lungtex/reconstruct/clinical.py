"""
定量结果与临床数据的关联

INPUT:  定量表 (QUANT_COLUMNS), 临床表 (scan_id, dlco_pct, emphysema_grade, fibrosis_grade)
OUTPUT: severity_bucket_summary(), correlate_with_clinical(), validate_clinical() 函数,
        CorrelationResult 类, SEVERITY_GRADES, CLINICAL_COLUMNS 常量
POS:    reconstruct-quantify 的临床验证：DLCO Spearman 相关与按严重程度分级的中位数

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd

from lungtex.errors import ClinicalDataError, StatisticsInputError
from lungtex.reconstruct.quantify import QuantReport, reports_to_frame
from lungtex.stats.rank_tests import kruskal_wallis, median_iqr, spearman
from lungtex.volume.types import TextureLabel

logger = logging.getLogger(__name__)

SEVERITY_GRADES = ("none", "mild", "moderate", "severe")
CLINICAL_COLUMNS = ["scan_id", "dlco_pct", "emphysema_grade", "fibrosis_grade"]

# 与 DLCO 做相关的特征：五类百分比 + 纤维化复合指标
CORRELATION_FEATURES = [f"{label.column}_pct" for label in TextureLabel] + ["fibrosis_pct"]

# 严重程度分级 -> 对应的定量特征
SEVERITY_FEATURES = {
    "emphysema_grade": ["emphysema_pct"],
    "fibrosis_grade": ["fibrosis_pct", "gg_pct", "ggr_pct", "honeycombing_pct"],
}


@dataclass
class CorrelationResult:
    """DLCO 相关表 + 分级汇总"""

    correlations: List[dict] = field(default_factory=list)
    severity: Dict[str, Dict[str, dict]] = field(default_factory=dict)

    def correlation_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.correlations, columns=["feature", "rho", "p_value", "n"])

    def to_dict(self) -> dict:
        return {"dlco_spearman": self.correlations, "severity": self.severity}


def _normalize_grade(value) -> str:
    grade = str(value).strip().lower()
    if grade not in SEVERITY_GRADES:
        raise ClinicalDataError(f"分级取值 {value!r} 不在 {SEVERITY_GRADES} 中")
    return grade


def validate_clinical(clinical: pd.DataFrame, scan_ids: Sequence[str]) -> pd.DataFrame:
    """
    校验临床表列名、连接键与分级取值。

    Returns:
        以 scan_id 为索引、分级已规范化的临床表

    Raises:
        ClinicalDataError: 缺少列、scan_id 重复、缺少定量结果中的 scan_id 或分级非法
    """
    missing_columns = [c for c in CLINICAL_COLUMNS if c not in clinical.columns]
    if missing_columns:
        raise ClinicalDataError(f"临床表缺少列: {missing_columns}")
    table = clinical[CLINICAL_COLUMNS].copy()
    table["scan_id"] = table["scan_id"].astype(str)
    duplicated = table["scan_id"][table["scan_id"].duplicated()].tolist()
    if duplicated:
        raise ClinicalDataError(f"临床表中 scan_id 重复: {duplicated}")
    missing_keys = sorted(set(scan_ids) - set(table["scan_id"]))
    if missing_keys:
        raise ClinicalDataError(f"临床表缺少定量结果中的 scan_id: {missing_keys}")
    for column in ("emphysema_grade", "fibrosis_grade"):
        table[column] = table[column].map(_normalize_grade)
    table["dlco_pct"] = pd.to_numeric(table["dlco_pct"], errors="coerce")
    return table.set_index("scan_id")


def severity_bucket_summary(
    reports: Union[Sequence[QuantReport], pd.DataFrame],
    grades: Mapping[str, str],
    features: Sequence[str] = ("emphysema_pct",),
) -> Dict[str, dict]:
    """
    按放射学分级汇总定量特征。

    Args:
        reports: QuantReport 列表或定量表
        grades: scan_id -> none / mild / moderate / severe
        features: 需要汇总的定量列

    Returns:
        feature -> {"groups": {grade: {"n", "median", "q1", "q3"}}, "kruskal_p": p 或 None}；
        没有扫描的分级会被跳过并记录警告
    """
    frame = reports if isinstance(reports, pd.DataFrame) else reports_to_frame(reports)
    frame = frame.assign(scan_id=frame["scan_id"].astype(str))
    frame["grade"] = [_normalize_grade(grades[s]) if s in grades else None for s in frame["scan_id"]]
    unmatched = frame.loc[frame["grade"].isna(), "scan_id"].tolist()
    if unmatched:
        raise ClinicalDataError(f"以下扫描没有分级: {unmatched}")

    summary: Dict[str, dict] = {}
    for feature in features:
        groups: Dict[str, dict] = {}
        samples = []
        for grade in SEVERITY_GRADES:
            values = frame.loc[frame["grade"] == grade, feature].dropna().to_numpy(dtype=np.float64)
            if len(values) == 0:
                logger.warning(f"{feature}: 分级 {grade} 没有扫描，已跳过")
                continue
            med, q1, q3 = median_iqr(values)
            groups[grade] = {"n": int(len(values)), "median": med, "q1": q1, "q3": q3}
            samples.append(values)
        kruskal_p: Optional[float] = kruskal_wallis(samples).p_value if len(samples) >= 2 else None
        summary[feature] = {"groups": groups, "kruskal_p": kruskal_p}
    return summary


def correlate_with_clinical(quant: pd.DataFrame, clinical: pd.DataFrame) -> CorrelationResult:
    """
    连接定量表与临床表，计算 DLCO Spearman 相关与分级汇总。

    Raises:
        ClinicalDataError: 临床表不合法或缺少连接键
    """
    quant = quant.assign(scan_id=quant["scan_id"].astype(str))
    table = validate_clinical(clinical, quant["scan_id"].tolist())
    joined = quant.join(table, on="scan_id")
    result = CorrelationResult()

    with_dlco = joined.dropna(subset=["dlco_pct"])
    for feature in CORRELATION_FEATURES:
        row = {"feature": feature, "rho": None, "p_value": None, "n": int(len(with_dlco))}
        try:
            test = spearman(with_dlco[feature].to_numpy(), with_dlco["dlco_pct"].to_numpy())
            row.update(rho=test.statistic, p_value=test.p_value)
        except StatisticsInputError as e:
            logger.warning(f"{feature} 与 DLCO 的相关无法计算: {e}")
        result.correlations.append(row)

    for grade_column, features in SEVERITY_FEATURES.items():
        grades = dict(zip(joined["scan_id"], joined[grade_column]))
        result.severity[grade_column] = severity_bucket_summary(joined[["scan_id"] + features], grades, features)
    logger.info(
        "DLCO 相关: " + ", ".join(
            f"{r['feature']} rho={r['rho']:.3f}" for r in result.correlations if r["rho"] is not None
        )
    )
    return result
