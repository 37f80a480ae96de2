"""
ROC / AUC

INPUT:  分数 + 二值标签，或 (n, 5) 概率 + 纹理编码
OUTPUT: auc_binary(), multiclass_auc(), auc_table(), roc_points(), roc_curves(),
        write_roc_csv(), write_roc_svg(), evaluate_split(), build_evaluation_report() 函数,
        SplitEvaluation 类
POS:    eval-stats 的分类评估部分，被 hypersearch 与 CLI evaluate 调用

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from sklearn.metrics import auc as trapezoid_area, roc_auc_score, roc_curve

from lungtex.errors import StatisticsInputError
from lungtex.volume.types import NUM_CLASSES, TextureLabel

logger = logging.getLogger(__name__)

AUC_MODES = ("micro", "macro", "per_class")
ROC_COLUMNS = ["class", "threshold", "fpr", "tpr"]

Curve = Tuple[np.ndarray, np.ndarray, np.ndarray]


# ============ 二分类 ============

def _binary_inputs(scores, labels) -> Tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).astype(bool).ravel()
    if scores.shape != labels.shape:
        raise StatisticsInputError(f"分数与标签长度不一致: {scores.shape} vs {labels.shape}")
    if labels.all() or not labels.any():
        raise StatisticsInputError("标签必须同时包含正例与负例")
    return scores, labels


def auc_binary(scores: Sequence[float], labels: Sequence[bool]) -> float:
    """
    二分类 AUC，等价于 Mann-Whitney 形式 (一致对数 + 0.5·并列对数) / (正例数·负例数)。

    Raises:
        StatisticsInputError: 标签全正或全负
    """
    scores, labels = _binary_inputs(scores, labels)
    return float(roc_auc_score(labels, scores))


def roc_points(scores: Sequence[float], labels: Sequence[bool]) -> Curve:
    """
    按全部不同分数做阈值扫描。

    Returns:
        (fpr, tpr, thresholds)，从 (0, 0) 开始到 (1, 1) 结束；首个阈值为 +inf
    """
    scores, labels = _binary_inputs(scores, labels)
    fpr, tpr, thresholds = roc_curve(labels, scores, drop_intermediate=False)
    return fpr, tpr, thresholds


# ============ 多分类 ============

def _one_hot(probabilities, true_labels) -> Tuple[np.ndarray, np.ndarray]:
    probs = np.asarray(probabilities, dtype=np.float64)
    codes = np.asarray(true_labels, dtype=np.int64).ravel()
    if probs.ndim != 2 or probs.shape[1] != NUM_CLASSES or probs.shape[0] != len(codes):
        raise StatisticsInputError(f"概率矩阵形状 {probs.shape} 与 {len(codes)} 个标签不符")
    if len(codes) and (codes.min() < 1 or codes.max() > NUM_CLASSES):
        raise StatisticsInputError("真实标签必须是 1..5 的纹理编码")
    if len(np.unique(codes)) < 2:
        raise StatisticsInputError("至少需要两个不同的真实类别")
    onehot = np.zeros_like(probs)
    onehot[np.arange(len(codes)), codes - 1] = 1.0
    return probs, onehot


def multiclass_auc(
    probabilities: np.ndarray,
    true_labels: Sequence[int],
    mode: str = "micro",
) -> Union[float, Dict[TextureLabel, Optional[float]]]:
    """
    一对其余的多分类 AUC。

    Args:
        probabilities: (n, 5) 概率，列顺序 NORMAL..EMPHYSEMA
        true_labels: 纹理编码 1..5
        mode: "micro" 展平 (样本, 类别) 后的二分类 AUC；"macro" 对出现的类取平均；
              "per_class" 返回每类 AUC，缺席的类为 None

    Raises:
        StatisticsInputError: 少于两个类别或形状不符
    """
    if mode not in AUC_MODES:
        raise StatisticsInputError(f"未知的 AUC 模式: {mode}，可选 {AUC_MODES}")
    probs, onehot = _one_hot(probabilities, true_labels)

    if mode == "micro":
        return auc_binary(probs.ravel(), onehot.ravel())

    per_class: Dict[TextureLabel, Optional[float]] = {}
    for label in TextureLabel:
        column = onehot[:, label - 1]
        if column.all() or not column.any():
            per_class[label] = None
        else:
            per_class[label] = auc_binary(probs[:, label - 1], column)
    if mode == "per_class":
        return per_class
    return float(np.mean([v for v in per_class.values() if v is not None]))


def auc_table(probabilities: np.ndarray, true_labels: Sequence[int]) -> Dict[str, Optional[float]]:
    """一次计算逐类 + micro + macro，键为类名小写与 "micro" / "macro" """
    per_class = multiclass_auc(probabilities, true_labels, mode="per_class")
    row: Dict[str, Optional[float]] = {label.column: auc for label, auc in per_class.items()}
    defined = [v for v in per_class.values() if v is not None]
    row["micro"] = multiclass_auc(probabilities, true_labels, mode="micro")
    row["macro"] = float(np.mean(defined))
    return row


def roc_curves(probabilities: np.ndarray, true_labels: Sequence[int]) -> Dict[str, Curve]:
    """逐类与 micro 的 ROC 曲线；没有正例或负例的类跳过"""
    probs, onehot = _one_hot(probabilities, true_labels)
    curves: Dict[str, Curve] = {}
    for label in TextureLabel:
        column = onehot[:, label - 1]
        if column.any() and not column.all():
            curves[label.column] = roc_points(probs[:, label - 1], column)
    curves["micro"] = roc_points(probs.ravel(), onehot.ravel())
    return curves


# ============ 输出 ============

def write_roc_csv(curves: Dict[str, Curve], path: Union[str, Path]) -> Path:
    """ROC 点写入 CSV：class, threshold, fpr, tpr"""
    path = Path(path)
    frames = [
        pd.DataFrame({"class": name, "threshold": thr, "fpr": fpr, "tpr": tpr})
        for name, (fpr, tpr, thr) in curves.items()
    ]
    frame = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=ROC_COLUMNS)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame[ROC_COLUMNS].to_csv(path, index=False, lineterminator="\n", float_format="%.17g")
    return path


def write_roc_svg(curves: Dict[str, Curve], path: Union[str, Path], title: str = "") -> Path:
    """ROC 曲线 SVG（无时间戳、固定 id 盐，重复生成内容一致）"""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context({"svg.hashsalt": "lungtex", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 5))
        try:
            ax.plot([0, 1], [0, 1], color="0.7", linestyle="--", linewidth=0.8)
            for name, (fpr, tpr, _) in curves.items():
                area = float(trapezoid_area(fpr, tpr))
                ax.plot(fpr, tpr, linewidth=1.4 if name == "micro" else 1.0, label=f"{name} ({area:.3f})")
            ax.set_xlim(0, 1)
            ax.set_ylim(0, 1.01)
            ax.set_xlabel("False positive rate")
            ax.set_ylabel("True positive rate")
            if title:
                ax.set_title(title)
            ax.legend(loc="lower right", fontsize=8)
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return path


# ============ 分组评估报告 ============

@dataclass
class SplitEvaluation:
    """单个数据划分的评估结果"""

    split: str
    scans: int
    patches: int
    aucs: Dict[str, Optional[float]] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {"split": self.split, "scans": self.scans, "patches": self.patches, "auc": dict(self.aucs)}


def evaluate_split(
    split: str,
    probabilities: np.ndarray,
    true_labels: Sequence[int],
    scan_ids: Optional[Sequence[str]] = None,
) -> SplitEvaluation:
    """计算一个划分的逐类 / micro / macro AUC 与计数"""
    table = auc_table(probabilities, true_labels)
    scans = len(set(scan_ids)) if scan_ids is not None else 0
    logger.info(f"评估 {split}: micro AUC={table['micro']:.4f}, macro AUC={table['macro']:.4f}")
    return SplitEvaluation(split=split, scans=scans, patches=len(true_labels), aucs=table)


def build_evaluation_report(evaluations: Sequence[SplitEvaluation]) -> Dict:
    """
    表格式评估报告：行为各类 + micro + macro，列为各数据划分。

    Returns:
        {"splits": [...], "counts": {split: {"scans", "patches"}}, "rows": [{"row": 名称, split: AUC, ...}]}
    """
    row_names = [label.column for label in TextureLabel] + ["micro", "macro"]
    rows: List[Dict] = []
    for name in row_names:
        row = {"row": name}
        for ev in evaluations:
            row[ev.split] = ev.aucs.get(name)
        rows.append(row)
    return {
        "splits": [ev.split for ev in evaluations],
        "counts": {ev.split: {"scans": ev.scans, "patches": ev.patches} for ev in evaluations},
        "rows": rows,
    }
