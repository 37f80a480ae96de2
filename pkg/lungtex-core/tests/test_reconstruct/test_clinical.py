"""
临床关联测试

INPUT:  lungtex.reconstruct.clinical 模块
OUTPUT: 验证临床表校验、DLCO 相关与分级汇总的测试用例
POS:    确保 correlate 命令的关联结果正确
"""

import numpy as np
import pandas as pd
import pytest

from lungtex.errors import ClinicalDataError
from lungtex.reconstruct import (
    QUANT_COLUMNS,
    correlate_with_clinical,
    severity_bucket_summary,
    validate_clinical,
)

GRADES = ["none", "mild", "moderate", "severe"]


def _quant_table(n: int = 16) -> pd.DataFrame:
    """肺气肿负荷随扫描序号递增的定量表"""
    emphysema = np.linspace(1.0, 34.0, n)
    frame = pd.DataFrame({
        "scan_id": [f"s{i:02d}" for i in range(n)],
        "total_ml": 4000.0,
        "normal_pct": 80.0 - emphysema,
        "gg_pct": 5.0,
        "ggr_pct": np.linspace(2.0, 4.0, n),
        "honeycombing_pct": 1.0,
        "emphysema_pct": emphysema,
    })
    frame["normal_pct"] = 100.0 - frame[["gg_pct", "ggr_pct", "honeycombing_pct", "emphysema_pct"]].sum(axis=1)
    frame["fibrosis_pct"] = frame["ggr_pct"] + frame["honeycombing_pct"]
    return frame[QUANT_COLUMNS]


def _clinical_table(n: int = 16) -> pd.DataFrame:
    """DLCO 随肺气肿负荷下降，每四个扫描一个分级"""
    return pd.DataFrame({
        "scan_id": [f"s{i:02d}" for i in range(n)],
        "dlco_pct": np.linspace(95.0, 30.0, n),
        "emphysema_grade": [GRADES[i * 4 // n] for i in range(n)],
        "fibrosis_grade": ["None", "MILD", "mild", "moderate"] * (n // 4),
    })


@pytest.mark.unit
class TestValidateClinical:
    """测试临床表校验"""

    def test_normalizes_grades(self):
        """分级大小写规范化，scan_id 作为索引"""
        table = validate_clinical(_clinical_table(), [f"s{i:02d}" for i in range(12)])
        assert table.index.name == "scan_id"
        assert set(table["fibrosis_grade"]) == {"none", "mild", "moderate"}

    def test_missing_scan(self):
        """定量结果中的扫描在临床表中缺失"""
        with pytest.raises(ClinicalDataError, match="s99"):
            validate_clinical(_clinical_table(), ["s00", "s99"])

    def test_missing_column(self):
        """缺少必需列"""
        with pytest.raises(ClinicalDataError, match="dlco_pct"):
            validate_clinical(_clinical_table().drop(columns=["dlco_pct"]), ["s00"])

    def test_duplicate_scan(self):
        """scan_id 重复"""
        table = pd.concat([_clinical_table(), _clinical_table().head(1)])
        with pytest.raises(ClinicalDataError, match="重复"):
            validate_clinical(table, ["s00"])

    def test_unknown_grade(self):
        """非法分级"""
        table = _clinical_table()
        table.loc[0, "emphysema_grade"] = "extreme"
        with pytest.raises(ClinicalDataError, match="extreme"):
            validate_clinical(table, ["s00"])


@pytest.mark.unit
class TestCorrelateWithClinical:
    """测试 DLCO 相关与分级汇总"""

    def test_dlco_correlation(self):
        """DLCO 与肺气肿负荷严格单调相反"""
        result = correlate_with_clinical(_quant_table(), _clinical_table())
        rows = {r["feature"]: r for r in result.correlations}

        assert rows["emphysema_pct"]["rho"] == pytest.approx(-1.0)
        assert rows["emphysema_pct"]["n"] == 16
        # 常数列无法计算相关
        assert rows["gg_pct"]["rho"] is None
        assert list(result.correlation_frame().columns) == ["feature", "rho", "p_value", "n"]

    def test_monotone_severity_association(self):
        """分级越重，肺气肿百分比中位数越高，Kruskal-Wallis p < 0.01"""
        result = correlate_with_clinical(_quant_table(), _clinical_table())
        summary = result.severity["emphysema_grade"]["emphysema_pct"]
        medians = [summary["groups"][g]["median"] for g in GRADES]

        assert medians == sorted(medians) and len(set(medians)) == 4
        assert summary["kruskal_p"] < 0.01

    def test_missing_dlco_is_dropped(self):
        """DLCO 缺失的扫描不参与相关"""
        clinical = _clinical_table()
        clinical.loc[[0, 1], "dlco_pct"] = np.nan
        result = correlate_with_clinical(_quant_table(), clinical)
        assert {r["n"] for r in result.correlations} == {14}

    def test_to_dict(self):
        """JSON 结构"""
        data = correlate_with_clinical(_quant_table(), _clinical_table()).to_dict()
        assert set(data) == {"dlco_spearman", "severity"}
        assert set(data["severity"]) == {"emphysema_grade", "fibrosis_grade"}


@pytest.mark.unit
class TestSeverityBuckets:
    """测试分级汇总"""

    def test_absent_grade_skipped(self):
        """没有扫描的分级被跳过，组数不足时不做检验"""
        quant = _quant_table(4)
        grades = {"s00": "none", "s01": "none", "s02": "none", "s03": "none"}
        summary = severity_bucket_summary(quant, grades)["emphysema_pct"]
        assert list(summary["groups"]) == ["none"]
        assert summary["kruskal_p"] is None

    def test_ungraded_scan(self):
        """定量表中有扫描没有分级"""
        with pytest.raises(ClinicalDataError, match="没有分级"):
            severity_bucket_summary(_quant_table(4), {"s00": "none"})
