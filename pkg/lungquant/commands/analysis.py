"""
分析子命令：evaluate / correlate / report

INPUT:  CommandContext, 权重 + 评估划分归档（或预计算概率 CSV）, quant_reports.csv, 临床 CSV
OUTPUT: run_evaluate(), run_correlate(), run_report(), read_probability_csv() 函数, PROBABILITY_COLUMNS 常量
POS:    流水线的验证环节：逐划分 AUC 表与 ROC、临床相关、汇总报告

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from lungtex.atlas import SPLIT_TAGS
from lungtex.classifier import TorchPatchClassifier
from lungtex.errors import InputValidationError
from lungtex.mlflow import log_evaluation_table, track_run
from lungtex.reconstruct import CorrelationResult, correlate_with_clinical
from lungtex.reconstruct.quantify import QUANT_COLUMNS
from lungtex.stats import (
    build_evaluation_report,
    compare_groups,
    compare_pair,
    evaluate_split,
    roc_curves,
    rows_to_frame,
    write_roc_csv,
    write_roc_svg,
)
from lungtex.volume import TextureLabel

from lungquant.commands.base import CommandContext, CommandResult, load_split_patchset, model_path
from lungquant.utils.file_ops import read_csv, read_json, write_csv, write_json

logger = logging.getLogger(__name__)

PROBABILITY_COLUMNS = ["split", "true_label"] + [f"p_{label.column}" for label in TextureLabel]

# 评估时依次查找的划分
HELD_OUT_SPLITS = tuple(tag for tag in SPLIT_TAGS if tag != "train")


# ============================================================
# evaluate
# ============================================================

def _parse_label(value: Any) -> int:
    text = str(value).strip()
    if text.isdigit():
        code = int(text)
        if code not in {int(label) for label in TextureLabel}:
            raise InputValidationError(f"真实标签编码必须为 1..5: {value!r}")
        return code
    return int(TextureLabel.from_name(text))


def read_probability_csv(path: Path) -> Dict[str, Tuple[np.ndarray, np.ndarray, Optional[List[str]]]]:
    """
    读取预计算概率。

    列：split, true_label (名称或 1..5 编码), p_normal..p_emphysema，可选 scan_id。

    Returns:
        split -> (probabilities (n, 5), 编码 (n,), scan_id 列表或 None)，按首次出现顺序

    Raises:
        InputValidationError: 缺列或标签非法
    """
    frame = read_csv(path, what="概率 CSV")
    missing = [c for c in PROBABILITY_COLUMNS if c not in frame.columns]
    if missing:
        raise InputValidationError(f"概率 CSV 缺少列: {missing}")
    frame = frame.assign(split=frame["split"].astype(str))

    groups = {}
    for split in dict.fromkeys(frame["split"]):
        part = frame[frame["split"] == split]
        probs = part[PROBABILITY_COLUMNS[2:]].to_numpy(dtype=np.float64)
        codes = np.asarray([_parse_label(v) for v in part["true_label"]], dtype=np.int64)
        scans = part["scan_id"].astype(str).tolist() if "scan_id" in part.columns else None
        groups[split] = (probs, codes, scans)
    return groups


def _model_probabilities(ctx: CommandContext) -> Dict[str, Tuple[np.ndarray, np.ndarray, Optional[List[str]]]]:
    classifier = TorchPatchClassifier.from_file(model_path(ctx), batch_size=ctx.run.reconstruction.batch_size)
    groups = {}
    for split in HELD_OUT_SPLITS:
        if not ctx.layout.patchset_header(split).exists():
            continue
        patchset = load_split_patchset(ctx, split)
        groups[split] = (classifier.predict_proba(patchset.tensors), patchset.labels.astype(np.int64), list(patchset.scan_ids))
    if not groups:
        raise InputValidationError(f"{ctx.layout.patches_dir} 中没有可评估的划分 {HELD_OUT_SPLITS}")
    return groups


def run_evaluate(ctx: CommandContext) -> CommandResult:
    """
    逐划分计算逐类 / micro / macro AUC。

    --probabilities 给出时直接评估 CSV 中的概率，否则用模型对 patches/ 中
    的 validation / test / external_test 归档推理。产物为 evaluation_report.json、
    roc_<split>.csv 与 roc_<split>.svg。
    """
    result = CommandResult("evaluate")
    probability_path = ctx.probabilities or ctx.run.paths.probabilities
    if probability_path:
        source = "probabilities"
        groups = read_probability_csv(Path(probability_path))
    else:
        source = "model"
        groups = _model_probabilities(ctx)

    with track_run("evaluate", {"source": source, "splits": ",".join(groups)}, tags={"stage": "evaluate"}):
        evaluations = []
        for split, (probs, codes, scans) in groups.items():
            evaluation = evaluate_split(split, probs, codes, scans)
            evaluations.append(evaluation)
            curves = roc_curves(probs, codes)
            result.add(write_roc_csv(curves, ctx.layout.roc_csv(split)))
            result.add(write_roc_svg(curves, ctx.layout.roc_svg(split), title=split))

        report = {"source": source, **build_evaluation_report(evaluations)}
        result.add(write_json(report, ctx.layout.evaluation_report))
        log_evaluation_table([
            {"split": ev.split, "class": name, "auc": auc}
            for ev in evaluations for name, auc in ev.aucs.items()
        ])

    for row in report["rows"]:
        logger.info(
            f"AUC {row['row']:>13}: "
            + ", ".join(f"{split}={_fmt(row[split])}" for split in report["splits"])
        )
    result.summary = {"splits": report["splits"], "micro": {ev.split: ev.aucs["micro"] for ev in evaluations}}
    return result


def _fmt(value: Optional[float], digits: int = 3) -> str:
    return "-" if value is None else f"{value:.{digits}f}"


# ============================================================
# correlate
# ============================================================

def run_correlate(ctx: CommandContext) -> CommandResult:
    """
    连接 quant_reports.csv 与临床 CSV，写出 correlation.json / correlation.csv。

    Raises:
        InputValidationError: 未给出临床 CSV
        ClinicalDataError: 缺列、缺少扫描或分级非法
    """
    result = CommandResult("correlate")
    clinical_path = ctx.clinical or ctx.run.paths.clinical
    if not clinical_path:
        raise InputValidationError("correlate 需要临床 CSV (--clinical 或 paths.clinical)")
    quant = read_csv(ctx.layout.quant_table, what="定量表")
    clinical = read_csv(clinical_path, what="临床 CSV")

    correlation: CorrelationResult = correlate_with_clinical(quant, clinical)
    result.add(write_json(correlation.to_dict(), ctx.layout.correlation_json))
    result.add(write_csv(correlation.correlation_frame(), ctx.layout.correlation_csv))
    result.summary = {"features": len(correlation.correlations)}
    return result


# ============================================================
# report
# ============================================================

def _markdown_table(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> List[str]:
    def cell(value: Any) -> str:
        if value is None or (isinstance(value, float) and not np.isfinite(value)):
            return "-"
        if isinstance(value, float):
            return f"{value:.4g}"
        return str(value)

    lines = ["| " + " | ".join(headers) + " |", "|" + "---|" * len(headers)]
    lines += ["| " + " | ".join(cell(v) for v in row) + " |" for row in rows]
    return lines


def _cohort_section(ctx: CommandContext, quant: pd.DataFrame) -> Optional[Dict[str, Any]]:
    """按划分比较定量结果；划分信息来自 splits.json"""
    if not ctx.layout.splits.exists():
        logger.info("没有 splits.json，跳过队列比较")
        return None
    splits = read_json(ctx.layout.splits)
    split_of = {scan_id: tag for tag, ids in splits.items() for scan_id in ids}
    frame = quant.assign(split=[split_of.get(s, "unassigned") for s in quant["scan_id"].astype(str)])
    groups = [tag for tag in SPLIT_TAGS if tag in set(frame["split"])]
    if "unassigned" in set(frame["split"]):
        groups.append("unassigned")
    if len(groups) < 2:
        logger.info("定量结果只覆盖一个划分，跳过队列比较")
        return None

    columns = [c for c in QUANT_COLUMNS if c != "scan_id"]
    rows = compare_groups(frame, "split", continuous=columns, groups=groups, seed=ctx.run.rng_seed)
    section: Dict[str, Any] = {"groups": groups, "rows": [row.to_dict() for row in rows]}
    if {"test", "external_test"} <= set(groups):
        section["test_vs_external_test"] = compare_pair(frame, "split", "test", "external_test", columns)
    return section


def _report_markdown(report: Dict[str, Any]) -> str:
    lines = ["# 肺纹理定量报告", ""]

    evaluation = report.get("evaluation")
    if evaluation:
        lines += ["## 分类性能 (AUC)", ""]
        splits = evaluation["splits"]
        lines += _markdown_table(["类别"] + splits, [[r["row"]] + [r[s] for s in splits] for r in evaluation["rows"]])
        lines += ["", "| 划分 | 扫描 | patch |", "|---|---|---|"]
        lines += [f"| {s} | {c['scans']} | {c['patches']} |" for s, c in evaluation["counts"].items()]
        lines.append("")

    quant = report.get("quantification")
    if quant:
        lines += ["## 定量结果 (%)", ""]
        headers = list(QUANT_COLUMNS)
        lines += _markdown_table(headers, [[row[c] for c in headers] for row in quant])
        lines.append("")

    cohort = report.get("cohort")
    if cohort:
        lines += ["## 划分间比较", ""]
        groups = cohort["groups"]
        lines += _markdown_table(
            ["变量"] + groups + ["检验", "p"],
            [[r["variable"]] + [r.get(g, "-") for g in groups] + [r["method"] or "-", r["p_value"]]
             for r in cohort["rows"]],
        )
        pair = cohort.get("test_vs_external_test")
        if pair:
            lines += ["", "### test vs external_test", ""]
            lines += _markdown_table(
                ["变量", "Wilcoxon p", "Welch p"],
                [[p["variable"], p["wilcoxon_p"], p["welch_p"]] for p in pair],
            )
        lines.append("")

    correlation = report.get("correlation")
    if correlation:
        lines += ["## 与 DLCO 的 Spearman 相关", ""]
        lines += _markdown_table(
            ["特征", "rho", "p", "n"],
            [[r["feature"], r["rho"], r["p_value"], r["n"]] for r in correlation["dlco_spearman"]],
        )
        for grade_column, features in correlation["severity"].items():
            lines += ["", f"### {grade_column}", ""]
            for feature, summary in features.items():
                lines.append(f"- {feature}: " + "; ".join(
                    f"{g} {v['median']:.1f} ({v['q1']:.1f}, {v['q3']:.1f}) n={v['n']}"
                    for g, v in summary["groups"].items()
                ) + f"; Kruskal-Wallis p={_fmt(summary['kruskal_p'], 4)}")
        lines.append("")

    leaderboard = report.get("hypersearch")
    if leaderboard:
        lines += ["## 超参数搜索（前 10）", ""]
        headers = ["rank", "dimensionality", "size_px", "selection_radius_mm", "min_fill_factor",
                   "patches_per_class", "shuffle_labels", "mean_auc"]
        lines += _markdown_table(headers, [[row.get(h) for h in headers] for row in leaderboard])
        lines.append("")

    return "\n".join(lines).rstrip("\n") + "\n"


def run_report(ctx: CommandContext) -> CommandResult:
    """
    汇总已有产物为 report.json 与 report.md。

    Raises:
        InputValidationError: 输出目录中没有任何可汇总的产物
    """
    result = CommandResult("report")
    layout = ctx.layout
    report: Dict[str, Any] = {}

    if layout.train_summary.exists():
        report["train"] = read_json(layout.train_summary)
    if layout.evaluation_report.exists():
        report["evaluation"] = read_json(layout.evaluation_report)
    if layout.quant_table.exists():
        quant = read_csv(layout.quant_table, what="定量表")
        report["quantification"] = quant.to_dict(orient="records")
        cohort = _cohort_section(ctx, quant)
        if cohort:
            report["cohort"] = cohort
    if layout.correlation_json.exists():
        report["correlation"] = read_json(layout.correlation_json)
    leaderboard_path = layout.hypersearch_dir / "leaderboard.csv"
    if leaderboard_path.exists():
        board = pd.read_csv(leaderboard_path, keep_default_na=False)
        report["hypersearch"] = board.head(10).to_dict(orient="records")

    if not report:
        raise InputValidationError(f"{layout.root} 中没有可汇总的产物")

    result.add(write_json(report, layout.report_json))
    layout.report_md.write_text(_report_markdown(report), encoding="utf-8")
    result.add(layout.report_md)
    result.summary = {"sections": list(report)}
    return result
