"""
数据准备子命令：phantom / atlas / sample

INPUT:  CommandContext（phantom 配置、清单、patch 规格、划分比例）
OUTPUT: run_phantom(), run_atlas(), run_sample() 函数
POS:    流水线前三步：生成体模队列 -> 汇编图谱 -> 按扫描划分并采样 PatchSet

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import logging

from lungtex.atlas import (
    AtlasManifest,
    ManifestEntry,
    sample_patches,
    save_patchset,
)
from lungtex.errors import InfeasibleSamplingError
from lungtex.phantom import PhantomSpec, generate_cohort
from lungtex.volume import TextureLabel, save_label_mask, save_lung_mask, save_volume

from lungquant.commands.base import (
    CommandContext,
    CommandResult,
    compute_splits,
    load_atlas,
    load_manifest,
    write_splits,
)
from lungquant.utils.file_ops import write_json

logger = logging.getLogger(__name__)


def run_phantom(ctx: CommandContext) -> CommandResult:
    """
    生成体模队列并写出清单。

    第 i 个扫描的分区比例为 compartments × multiplier(i)，
    产物为 phantoms/<scan>{,_labels,_lung}.rvol.json、phantoms/<scan>_census.json 与 manifest.json。
    """
    cfg = ctx.run.phantom
    result = CommandResult("phantom")
    specs = []
    for i, scan_id in enumerate(cfg.scan_ids()):
        multiplier = cfg.multiplier(i)
        compartments = tuple(
            (TextureLabel.from_name(name), fraction * multiplier) for name, fraction in cfg.compartments.items()
        )
        specs.append((scan_id, PhantomSpec(
            dims=tuple(cfg.dims),
            spacing=tuple(cfg.spacing),
            compartments=compartments,
            rng_seed=ctx.run.rng_seed,
        )))

    logger.info(f"开始生成体模: {len(specs)} 个扫描, dims={cfg.dims}")
    out_dir = ctx.layout.phantoms_dir
    entries = []
    census = {}
    for (scan_id, phantom), (_, spec) in zip(generate_cohort(specs), specs):
        save_volume(phantom.volume, out_dir / scan_id)
        save_label_mask(phantom.labels, out_dir / f"{scan_id}_labels")
        save_lung_mask(phantom.lung, out_dir / f"{scan_id}_lung")
        census[scan_id] = phantom.census_dict()
        result.add(write_json(census[scan_id], out_dir / f"{scan_id}_census.json"))
        entries.append(ManifestEntry(
            scan_id=scan_id,
            volume=f"{out_dir.name}/{scan_id}.rvol.json",
            labels=f"{out_dir.name}/{scan_id}_labels.rvol.json",
            lung=f"{out_dir.name}/{scan_id}_lung.rvol.json",
        ))

    result.add(AtlasManifest(entries=entries, root=ctx.layout.root).to_file(ctx.layout.manifest))
    result.summary = {"scans": len(entries), "census": census}
    return result


def run_atlas(ctx: CommandContext) -> CommandResult:
    """汇编图谱并写出 atlas_summary.json（每扫描每类候选数与总计）"""
    result = CommandResult("atlas")
    atlas = load_atlas(load_manifest(ctx))
    summary = {
        "scans": atlas.summary(),
        "totals": {label.name: atlas.candidate_count(label) for label in TextureLabel},
        "scans_with_class": {label.name: atlas.scans_with_class(label) for label in TextureLabel},
    }
    result.add(write_json(summary, ctx.layout.atlas_summary))
    result.summary = {"scans": len(atlas), "totals": summary["totals"]}
    return result


def run_sample(ctx: CommandContext) -> CommandResult:
    """
    按扫描划分后采样。

    train 划分使用配置中的 PatchSpec；其余划分使用评估规格（最小填充率 0.5）。
    评估划分不可行时记录警告并跳过，train 不可行时报错。

    Raises:
        InfeasibleSamplingError: 训练划分中某类没有可行候选
    """
    result = CommandResult("sample")
    manifest = load_manifest(ctx)
    atlas = load_atlas(manifest)
    splits = compute_splits(ctx, manifest, atlas.scan_ids)
    result.add(write_splits(ctx, splits))

    spec = ctx.run.patch_spec()
    counts = {}
    for tag, scan_ids in splits.items():
        subset = atlas.subset(scan_ids)
        if tag == "train":
            patchset = sample_patches(subset, spec)
        else:
            try:
                patchset = sample_patches(subset, spec.for_evaluation()).with_tag(tag)
            except InfeasibleSamplingError as e:
                logger.warning(f"划分 {tag} 无法采样，已跳过: {e}")
                continue
        header = save_patchset(patchset, ctx.layout.patches_dir, tag)
        result.add(header)
        counts[tag] = {"scans": len(scan_ids), "patches": len(patchset)}

    result.summary = {"splits": counts, "spec": spec.to_dict()}
    return result
