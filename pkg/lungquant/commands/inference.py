"""
推理子命令：classify / quantify

INPUT:  CommandContext, 权重文件, 清单（体数据 + 肺掩膜）, maps/ 中的类别图
OUTPUT: run_classify(), run_quantify() 函数
POS:    流水线的应用环节：整肺重建类别图，再按类别统计体积百分比

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import logging

from lungtex.classifier import TorchPatchClassifier
from lungtex.errors import InputValidationError
from lungtex.reconstruct import classify_volume, quantify, reports_to_frame
from lungtex.volume import load_label_mask, save_label_mask

from lungquant.commands.base import CommandContext, CommandResult, load_manifest, model_path, selected_entries
from lungquant.utils.file_ops import write_csv, write_json

logger = logging.getLogger(__name__)


def run_classify(ctx: CommandContext) -> CommandResult:
    """逐扫描重建类别图，写出 maps/<scan>_map.rvol.json（uint8）"""
    result = CommandResult("classify")
    classifier = TorchPatchClassifier.from_file(model_path(ctx), batch_size=ctx.run.reconstruction.batch_size)
    recon_cfg = ctx.run.reconstruction.to_reconstruction_config()
    manifest = load_manifest(ctx)

    patches = {}
    for entry in selected_entries(ctx, manifest):
        volume = manifest.load_volume(entry)
        lung = manifest.load_lung(entry, volume)
        classification = classify_volume(classifier, volume, lung, recon_cfg)
        result.add(save_label_mask(classification.labels, ctx.layout.class_map(entry.scan_id)))
        patches[entry.scan_id] = classification.patch_count

    result.summary = {"scans": len(patches), "patches": patches}
    return result


def run_quantify(ctx: CommandContext) -> CommandResult:
    """
    逐扫描定量，写出 quant/<scan>.json 与汇总表 quant_reports.csv。

    Raises:
        InputValidationError: 某扫描还没有类别图
    """
    result = CommandResult("quantify")
    manifest = load_manifest(ctx)
    reports = []
    for entry in selected_entries(ctx, manifest):
        map_path = ctx.layout.class_map(entry.scan_id)
        if not map_path.exists():
            raise InputValidationError(f"扫描 {entry.scan_id} 没有类别图，请先运行 classify: {map_path}")
        classification = load_label_mask(map_path)
        lung = manifest.load_lung(entry, manifest.load_volume(entry))
        report = quantify(classification, lung, scan_id=entry.scan_id)
        result.add(write_json(report.to_dict(), ctx.layout.quant_report(entry.scan_id)))
        reports.append(report)

    result.add(write_csv(reports_to_frame(reports), ctx.layout.quant_table))
    result.summary = {"scans": len(reports), "fibrosis_pct": {r.scan_id: r.fibrosis_pct for r in reports}}
    return result
