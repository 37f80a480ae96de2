"""
模型子命令：train / hypersearch

INPUT:  CommandContext, patches/train.json + patches/validation.json, 清单与 splits.json
OUTPUT: run_train(), run_hypersearch() 函数
POS:    流水线的训练环节：在采样结果上训练最终模型，或在训练扫描上做交叉验证网格搜索

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import logging

from lungtex.classifier import build_model, history_to_frame, hyperparameter_search, save_model, train
from lungtex.mlflow import (
    compute_patchset_hash,
    log_artifact_files,
    log_dataset_metadata,
    log_run_metrics,
    track_run,
)

from lungquant.commands.base import (
    CommandContext,
    CommandResult,
    load_atlas,
    load_manifest,
    load_split_patchset,
    resolve_splits,
)
from lungquant.schemas import PatchSection
from lungquant.utils.file_ops import write_csv, write_json

logger = logging.getLogger(__name__)


def run_train(ctx: CommandContext) -> CommandResult:
    """
    训练最终模型。

    模型结构由训练集归档中的 PatchSpec 与 model 配置决定，
    产物为 model.tqwt、history.csv 与 train_summary.json。
    """
    result = CommandResult("train")
    train_set = load_split_patchset(ctx, "train")
    val_set = load_split_patchset(ctx, "validation")
    spec = train_set.spec
    model_config = ctx.run.model.to_model_config(spec)
    train_config = ctx.run.train_config()

    params = {
        **{f"patch_{k}": v for k, v in spec.to_dict().items()},
        **{f"model_{k}": v for k, v in model_config.to_dict().items()},
        **{f"train_{k}": v for k, v in train_config.to_dict().items()},
    }
    run_name = f"train_{spec.dimensionality.value}_{spec.size_px}"

    with track_run(run_name, params, tags={"stage": "train"}):
        log_dataset_metadata(train_set, "train")
        log_dataset_metadata(val_set, "validation")

        model = build_model(model_config, ctx.run.rng_seed)
        outcome = train(model, train_set, val_set, train_config)

        result.add(save_model(outcome.model, ctx.layout.model))
        result.add(write_csv(history_to_frame(outcome.history), ctx.layout.history))
        summary = {
            "best_epoch": outcome.best_epoch,
            "best_val_acc": outcome.best_val_acc,
            "epochs_run": len(outcome.history),
            "stopped_early": outcome.stopped_early,
            "patch_spec": spec.to_dict(),
            "model": model_config.to_dict(),
            "train": {k: v for k, v in train_config.to_dict().items() if k != "augment"},
            "augment": train_config.to_dict()["augment"],
            "train_patchset_sha256": compute_patchset_hash(train_set),
            "validation_patchset_sha256": compute_patchset_hash(val_set),
        }
        result.add(write_json(summary, ctx.layout.train_summary))

        log_run_metrics({"best_val_acc": outcome.best_val_acc, "best_epoch": outcome.best_epoch})
        log_artifact_files([str(p) for p in result.outputs], artifact_path="train")

    result.summary = {k: summary[k] for k in ("best_epoch", "best_val_acc", "epochs_run", "stopped_early")}
    return result


def run_hypersearch(ctx: CommandContext) -> CommandResult:
    """
    在训练划分的扫描上做交叉验证网格搜索。

    产物位于 hypersearch/：leaderboard.csv、best.json，以及把最佳 patch
    规格代入后的 best_run_config.json（供 sample + train 生成最终模型）。
    """
    result = CommandResult("hypersearch")
    manifest = load_manifest(ctx)
    atlas = load_atlas(manifest)
    splits = resolve_splits(ctx, manifest, atlas.scan_ids)
    train_atlas = atlas.subset(splits["train"])

    grid = ctx.run.grid
    search = hyperparameter_search(
        train_atlas,
        grid.to_grid(),
        train_cfg=ctx.run.train_config(),
        folds=grid.folds,
        seed=ctx.run.rng_seed,
        points=grid.points(),
        model_overrides=ctx.run.model.overrides(),
    )

    out_dir = ctx.layout.hypersearch_dir
    result.add(write_csv(search.to_frame(), out_dir / "leaderboard.csv"))
    best = search.leaderboard[0]
    result.add(write_json({
        "point": search.best_point.to_dict(),
        "mean_auc": best.mean_auc,
        "fold_aucs": best.fold_aucs,
        "patch_spec": search.best_spec.to_dict(),
        "model": search.best_model_config.to_dict(),
    }, out_dir / "best.json"))

    best_patch = PatchSection(
        size_px=search.best_spec.size_px,
        dimensionality=search.best_spec.dimensionality.value,
        selection_radius_mm=search.best_spec.selection_radius_mm,
        min_fill_factor=search.best_spec.min_fill_factor,
        patches_per_class=search.best_spec.patches_per_class,
    )
    best_run = ctx.run.model_copy(update={"patch": best_patch})
    result.add(write_json(best_run.model_dump(mode="json"), out_dir / "best_run_config.json"))

    result.summary = {
        "points": len(search.leaderboard),
        "best": search.best_point.to_dict(),
        "best_mean_auc": best.mean_auc,
    }
    return result
