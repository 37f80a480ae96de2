"""
超参数网格搜索（按扫描分折的交叉验证）

INPUT:  Atlas, HyperGrid, TrainConfig, 折数, 种子
OUTPUT: assign_folds(), hyperparameter_search() 函数, PointScore, SearchResult 类
POS:    classifier 的模型选择入口，被 CLI hypersearch 命令调用

每个网格点：扫描分为 K 折；第 k 折作为验证，其余折的图谱按该点的 PatchSpec 采样训练，
验证集按评估规格（填充率 0.5）采样；分数为各折 micro AUC 的均值。
采样不可行的点记 0 分并标记，不中断搜索。

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from lungtex.atlas.atlas import Atlas
from lungtex.atlas.sampling import sample_patches
from lungtex.atlas.spec import PatchSpec
from lungtex.classifier.config import GridPoint, HyperGrid, ModelConfig, TrainConfig
from lungtex.classifier.inference import TorchPatchClassifier
from lungtex.classifier.training import build_model, train
from lungtex.errors import InfeasibleSamplingError, InputValidationError, StatisticsInputError
from lungtex.mlflow.tracking import log_run_metrics, track_run
from lungtex.rng import stream
from lungtex.stats.auc import multiclass_auc
from lungtex.volume.types import TextureLabel

logger = logging.getLogger(__name__)

DEFAULT_FOLDS = 5


# ============ 分折 ============

def assign_folds(atlas: Atlas, folds: int, seed: int) -> Dict[str, int]:
    """
    按扫描分层分折。

    类别按含有该类的扫描数从少到多处理；每类尚未分配的扫描按 "folds" 随机流打乱后，
    依次放入当前含该类扫描最少的折（平局取总扫描数最少、序号最小者）。
    不含任何标注的扫描最后轮流分配。

    Returns:
        scan_id -> 折号 (0..folds-1)
    """
    if folds < 2:
        raise InputValidationError(f"折数必须 >= 2: {folds}")
    if len(atlas) < folds:
        raise InputValidationError(f"扫描数 {len(atlas)} 少于折数 {folds}")

    rng = stream(seed, "folds")
    assignment: Dict[str, int] = {}
    fold_sizes = [0] * folds
    by_class = {
        label: [e.scan_id for e in atlas.entries if e.candidate_count(label) > 0] for label in TextureLabel
    }

    for label in sorted(TextureLabel, key=lambda lb: (len(by_class[lb]), int(lb))):
        holders = by_class[label]
        per_fold = [0] * folds
        for scan_id in holders:
            if scan_id in assignment:
                per_fold[assignment[scan_id]] += 1
        pending = [s for s in holders if s not in assignment]
        for idx in rng.permutation(len(pending)):
            target = min(range(folds), key=lambda f: (per_fold[f], fold_sizes[f], f))
            assignment[pending[idx]] = target
            per_fold[target] += 1
            fold_sizes[target] += 1

    for scan_id in atlas.scan_ids:
        if scan_id not in assignment:
            target = min(range(folds), key=lambda f: (fold_sizes[f], f))
            assignment[scan_id] = target
            fold_sizes[target] += 1
    return assignment


# ============ 结果类型 ============

@dataclass
class PointScore:
    """单个网格点的交叉验证结果"""

    point: GridPoint
    fold_aucs: List[float] = field(default_factory=list)
    infeasible: bool = False
    message: str = ""

    @property
    def mean_auc(self) -> float:
        if self.infeasible or not self.fold_aucs:
            return 0.0
        return float(np.mean(self.fold_aucs))

    def to_row(self) -> Dict[str, Any]:
        row = self.point.to_dict()
        row["mean_auc"] = self.mean_auc
        row["fold_aucs"] = ";".join(f"{a:.6f}" for a in self.fold_aucs)
        row["infeasible"] = self.infeasible
        row["message"] = self.message
        return row


@dataclass
class SearchResult:
    """
    搜索结果

    Attributes:
        best_point: 最佳网格点
        best_spec: 最佳 PatchSpec（rng_seed 为搜索种子）
        best_model_config: 对应的 ModelConfig
        leaderboard: 按 (平均 AUC 降序, 平局次序) 排列的全部结果
    """

    best_point: GridPoint
    best_spec: PatchSpec
    best_model_config: ModelConfig
    leaderboard: List[PointScore]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame([score.to_row() for score in self.leaderboard])
        frame.insert(0, "rank", np.arange(1, len(frame) + 1))
        return frame


# ============ 搜索 ============

def _check_class_coverage(atlas: Atlas, folds: int) -> None:
    short = {
        label.name: atlas.scans_with_class(label)
        for label in TextureLabel
        if atlas.scans_with_class(label) < folds
    }
    if short:
        raise InputValidationError(f"以下类别出现的扫描数少于折数 {folds}: {short}")


def _score_fold(
    atlas: Atlas,
    point: GridPoint,
    spec: PatchSpec,
    train_ids: Sequence[str],
    val_ids: Sequence[str],
    train_cfg: TrainConfig,
    model_overrides: Dict[str, Any],
    fold: int,
) -> float:
    train_set = sample_patches(atlas.subset(train_ids), spec)
    val_set = sample_patches(atlas.subset(val_ids), spec.for_evaluation())

    train_labels = None
    if point.shuffle_labels:
        train_labels = stream(spec.rng_seed, "corrupt", fold).permutation(train_set.labels)

    model = build_model(ModelConfig.from_patch_spec(spec, **model_overrides), train_cfg.rng_seed)
    result = train(model, train_set, val_set, train_cfg, train_labels=train_labels)
    probs = TorchPatchClassifier(result.model).predict_proba(val_set.tensors)
    return float(multiclass_auc(probs, val_set.labels, mode="micro"))


def _evaluate_point(
    atlas: Atlas,
    point: GridPoint,
    fold_of: Dict[str, int],
    folds: int,
    seed: int,
    train_cfg: TrainConfig,
    model_overrides: Dict[str, Any],
) -> PointScore:
    spec = point.to_patch_spec(seed)
    score = PointScore(point)
    for k in range(folds):
        val_ids = [s for s in atlas.scan_ids if fold_of[s] == k]
        train_ids = [s for s in atlas.scan_ids if fold_of[s] != k]
        try:
            auc = _score_fold(atlas, point, spec, train_ids, val_ids, train_cfg, model_overrides, k)
        except (InfeasibleSamplingError, StatisticsInputError) as e:
            score.infeasible = True
            score.message = f"fold {k}: {e}"
            logger.warning(f"网格点 {point.to_dict()} 不可行: {score.message}")
            return score
        score.fold_aucs.append(auc)
        logger.info(f"网格点 {point.to_dict()} 第 {k + 1}/{folds} 折 micro AUC={auc:.4f}")
    return score


def hyperparameter_search(
    atlas: Atlas,
    grid: HyperGrid,
    train_cfg: Optional[TrainConfig] = None,
    folds: int = DEFAULT_FOLDS,
    seed: int = 0,
    points: Optional[Sequence[GridPoint]] = None,
    model_overrides: Optional[Dict[str, Any]] = None,
) -> SearchResult:
    """
    交叉验证网格搜索。

    Args:
        atlas: 训练用图谱
        grid: 超参数网格
        train_cfg: 每折使用的训练配置
        folds: 折数
        seed: 分折与采样种子
        points: 显式网格点（含阴性对照点），默认为 grid.points()
        model_overrides: ModelConfig 覆盖项（block_layers / initial_filters / growth_rate）

    Returns:
        SearchResult

    Raises:
        InputValidationError: 某类出现的扫描数少于折数，或没有网格点
    """
    train_cfg = train_cfg or TrainConfig(rng_seed=seed)
    model_overrides = {k: v for k, v in (model_overrides or {}).items() if v is not None}
    points = list(points) if points is not None else grid.points()
    if not points:
        raise InputValidationError("网格为空")
    _check_class_coverage(atlas, folds)
    fold_of = assign_folds(atlas, folds, seed)

    logger.info(f"开始超参数搜索: {len(points)} 个网格点, {folds} 折, {len(atlas)} 个扫描")
    scores: List[PointScore] = []
    for i, point in enumerate(points):
        with track_run(f"hypersearch_point_{i:03d}", point.to_dict(), tags={"stage": "hypersearch"}):
            score = _evaluate_point(atlas, point, fold_of, folds, seed, train_cfg, model_overrides)
            log_run_metrics({"mean_auc": score.mean_auc, **{f"fold_{k}_auc": a for k, a in enumerate(score.fold_aucs)}})
        scores.append(score)

    scores.sort(key=lambda s: (-s.mean_auc, s.point.sort_key()))
    best = scores[0]
    best_spec = best.point.to_patch_spec(seed)
    logger.info(f"最佳网格点: {best.point.to_dict()}, mean micro AUC={best.mean_auc:.4f}")
    return SearchResult(
        best_point=best.point,
        best_spec=best_spec,
        best_model_config=ModelConfig.from_patch_spec(best_spec, **model_overrides),
        leaderboard=scores,
    )
