"""
端到端流水线测试

INPUT:  lungquant.cli（phantom -> atlas -> sample -> train -> classify -> quantify -> evaluate -> report）
OUTPUT: 桌面规模完整流程与可复现性的测试用例
POS:    验证各子命令通过输出目录正确衔接；体模 24³、2D N=4、单 dense block
"""

import json
from pathlib import Path

import pandas as pd
import pytest

from lungquant.cli import EXIT_OK, main

DESK_CONFIG = {
    "rng_seed": 3,
    "phantom": {
        "count": 4,
        "dims": [24, 24, 24],
        "compartments": {"gg": 0.15, "ggr": 0.15, "honeycombing": 0.15, "emphysema": 0.15},
        "severity_ramp": [1.0, 1.0],
    },
    "patch": {
        "size_px": 4,
        "dimensionality": "2D",
        "selection_radius_mm": 2.0,
        "min_fill_factor": 0.75,
        "patches_per_class": 5,
    },
    "model": {"block_layers": [1], "initial_filters": 4, "growth_rate": 2},
    "train": {"batch_size": 10, "patience_epochs": 2, "max_epochs": 3},
    "augment": {"enabled": False},
    "split": {"fractions": [0.5, 0.25, 0.25]},
    "reconstruction": {"stride": [4, 4, 4]},
}

PIPELINE = ["phantom", "atlas", "sample", "train", "classify", "quantify", "evaluate", "report"]


def _read(path: Path):
    return json.loads(path.read_text(encoding="utf-8"))


def _run(command: str, config: str, out: Path, *extra: str) -> None:
    assert main([command, "--config", config, "--out", str(out), *extra]) == EXIT_OK, command


@pytest.mark.e2e
@pytest.mark.slow
class TestDeskPipeline:
    """测试桌面规模完整流程"""

    def test_full_pipeline(self, write_run_config, tmp_path):
        """各步骤产物齐全且数值自洽"""
        config = write_run_config(DESK_CONFIG)
        out = tmp_path / "out"
        for command in PIPELINE:
            _run(command, config, out)

        manifest = _read(out / "manifest.json")
        scan_ids = [entry["scan_id"] for entry in manifest["scans"]]
        assert scan_ids == ["phantom_000", "phantom_001", "phantom_002", "phantom_003"]

        census = {s: _read(out / "phantoms" / f"{s}_census.json") for s in scan_ids}
        for data in census.values():
            assert sum(data["counts"].values()) == data["lung_voxels"]

        splits = _read(out / "splits.json")
        assert {tag: len(ids) for tag, ids in splits.items()} == {"train": 2, "validation": 1, "test": 1}
        assert sorted(sum(splits.values(), [])) == scan_ids

        train_header = _read(out / "patches" / "train.json")
        assert train_header["count"] == 25
        assert set(train_header["class_counts"].values()) == {5}
        assert sorted(train_header["scans"]) == sorted(splits["train"])
        assert _read(out / "patches" / "validation.json")["spec"]["min_fill_factor"] == 0.5

        summary = _read(out / "train_summary.json")
        assert 1 <= summary["best_epoch"] <= summary["epochs_run"] <= 3
        assert 0.0 <= summary["best_val_acc"] <= 1.0
        assert (out / "model.tqwt").exists()
        assert len(pd.read_csv(out / "history.csv")) == summary["epochs_run"]

        quant = pd.read_csv(out / "quant_reports.csv", dtype={"scan_id": str})
        assert quant["scan_id"].tolist() == scan_ids
        pct = quant[[c for c in quant.columns if c.endswith("_pct") and c != "fibrosis_pct"]]
        assert pct.sum(axis=1).tolist() == pytest.approx([100.0] * 4)
        assert quant["fibrosis_pct"].tolist() == pytest.approx((quant["ggr_pct"] + quant["honeycombing_pct"]).tolist())
        # 1 mm 各向同性：毫升数 = 肺体素数 / 1000
        assert quant["total_ml"].tolist() == pytest.approx([census[s]["lung_voxels"] / 1000.0 for s in scan_ids])
        for scan_id in scan_ids:
            assert (out / "maps" / f"{scan_id}_map.rvol.json").exists()

        evaluation = _read(out / "evaluation_report.json")
        assert evaluation["source"] == "model"
        assert evaluation["splits"] == ["validation", "test"]
        assert all(0.0 <= row["test"] <= 1.0 for row in evaluation["rows"])

        report = _read(out / "report.json")
        assert list(report) == ["train", "evaluation", "quantification", "cohort"]
        assert report["cohort"]["groups"] == ["train", "validation", "test"]
        assert (out / "report.md").exists()

    def test_scan_filter(self, write_run_config, tmp_path):
        """--scan 只重建与定量指定扫描"""
        config = write_run_config(DESK_CONFIG)
        out = tmp_path / "out"
        for command in ("phantom", "atlas", "sample", "train"):
            _run(command, config, out)
        _run("classify", config, out, "--scan", "phantom_002")
        _run("quantify", config, out, "--scan", "phantom_002")

        assert sorted(p.name for p in (out / "maps").glob("*_map.rvol.json")) == ["phantom_002_map.rvol.json"]
        quant = pd.read_csv(out / "quant_reports.csv", dtype={"scan_id": str})
        assert quant["scan_id"].tolist() == ["phantom_002"]


def _tree(root: Path) -> dict:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.mark.e2e
@pytest.mark.slow
class TestReproducibility:
    """测试线程数不影响产物"""

    def test_pipeline_independent_of_threads(self, write_run_config, tmp_path):
        """--threads 1 与 --threads 8 跑完整流程，全部产物逐字节一致"""
        config = write_run_config(DESK_CONFIG)
        for name, threads in (("t1", "1"), ("t8", "8")):
            for command in PIPELINE:
                _run(command, config, tmp_path / name, "--threads", threads)

        single, pooled = _tree(tmp_path / "t1"), _tree(tmp_path / "t8")
        assert sorted(single) == sorted(pooled)
        for key in ("model.tqwt", "history.csv", "quant_reports.csv", "evaluation_report.json", "report.json",
                    "report.md"):
            assert key in single
        maps = [key for key in single if key.startswith("maps/")]
        assert len(maps) >= 4
        for key in single:
            assert single[key] == pooled[key], key
