"""
产物文件读写测试

INPUT:  lungquant.utils.file_ops
OUTPUT: JSON / CSV 序列化与产物布局的测试用例
POS:    确保产物字节级可复现
"""

import json
from enum import Enum
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from lungtex.errors import InputValidationError
from lungquant.utils.file_ops import ArtifactLayout, read_csv, read_json, to_jsonable, write_csv, write_json


class _Color(Enum):
    RED = "red"


@pytest.mark.unit
class TestToJsonable:
    """测试 JSON 原生类型转换"""

    def test_numpy_values(self):
        """numpy 标量与数组转为 Python 值"""
        data = {"n": np.int64(3), "x": np.float32(0.5), "flag": np.bool_(True), "arr": np.arange(3)}
        assert to_jsonable(data) == {"n": 3, "x": 0.5, "flag": True, "arr": [0, 1, 2]}

    def test_non_finite_to_none(self):
        """NaN 与 inf 转为 None"""
        assert to_jsonable([float("nan"), float("inf"), 1.0]) == [None, None, 1.0]

    def test_enum_and_path(self):
        """枚举取值，Path 取字符串"""
        assert to_jsonable({"c": _Color.RED, "p": Path("a/b")}) == {"c": "red", "p": "a/b"}


@pytest.mark.unit
class TestJsonFiles:
    """测试 JSON 读写"""

    def test_write_is_deterministic(self, tmp_path):
        """同一数据两次写出的字节一致，键顺序保留"""
        data = {"b": 1, "a": [1.5, None], "名称": "肺"}
        first = write_json(data, tmp_path / "one.json").read_bytes()
        second = write_json(data, tmp_path / "two.json").read_bytes()
        assert first == second
        assert first.endswith(b"\n")
        assert list(json.loads(first)) == ["b", "a", "名称"]

    def test_creates_parent(self, tmp_path):
        """自动创建父目录"""
        path = write_json({}, tmp_path / "nested" / "dir" / "x.json")
        assert path.exists()

    def test_read_missing(self, tmp_path):
        """文件不存在"""
        with pytest.raises(InputValidationError, match="不存在"):
            read_json(tmp_path / "missing.json")

    def test_read_malformed(self, tmp_path):
        """非法 JSON"""
        path = tmp_path / "bad.json"
        path.write_text("{", encoding="utf-8")
        with pytest.raises(InputValidationError, match="解析失败"):
            read_json(path)


@pytest.mark.unit
class TestCsvFiles:
    """测试 CSV 读写"""

    def test_round_trip_precision(self, tmp_path):
        """浮点数按往返精度写出，scan_id 保持字符串"""
        frame = pd.DataFrame({"scan_id": ["001", "002"], "gg_pct": [1 / 3, 2 / 3]})
        loaded = read_csv(write_csv(frame, tmp_path / "q.csv"))
        assert loaded["scan_id"].tolist() == ["001", "002"]
        assert loaded["gg_pct"].tolist() == [1 / 3, 2 / 3]

    def test_grade_words_not_treated_as_missing(self, tmp_path):
        """"None" 等分级文本原样保留，只有空单元格视为缺失"""
        path = tmp_path / "clinical.csv"
        path.write_text(
            "scan_id,dlco_pct,emphysema_grade,fibrosis_grade\n"
            "s1,80,None,mild\n"
            "s2,,Severe,NA\n",
            encoding="utf-8",
        )
        loaded = read_csv(path, what="临床 CSV")
        assert loaded["emphysema_grade"].tolist() == ["None", "Severe"]
        assert loaded["fibrosis_grade"].tolist() == ["mild", "NA"]
        assert loaded["dlco_pct"].iloc[0] == 80.0
        assert pd.isna(loaded["dlco_pct"].iloc[1])

    def test_missing_csv(self, tmp_path):
        """缺失文件报错信息带说明"""
        with pytest.raises(InputValidationError, match="临床 CSV"):
            read_csv(tmp_path / "c.csv", what="临床 CSV")


@pytest.mark.unit
class TestArtifactLayout:
    """测试产物布局"""

    def test_paths(self, tmp_path):
        """各产物位于固定位置"""
        layout = ArtifactLayout(tmp_path)
        assert layout.manifest == tmp_path / "manifest.json"
        assert layout.patchset_header("validation") == tmp_path / "patches" / "validation.json"
        assert layout.class_map("s1") == tmp_path / "maps" / "s1_map.rvol.json"
        assert layout.quant_report("s1") == tmp_path / "quant" / "s1.json"
        assert layout.roc_svg("test") == tmp_path / "roc_test.svg"
        assert layout.model == tmp_path / "model.tqwt"
