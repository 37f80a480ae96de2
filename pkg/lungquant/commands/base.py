"""
子命令公共部分

INPUT:  RunConfig, CLISettings, 输出目录, 命令行选项
OUTPUT: CommandContext, CommandResult 数据类, load_manifest(), load_atlas(), selected_entries(),
        compute_splits(), resolve_splits(), write_splits(), model_path(), load_split_patchset() 函数
POS:    commands 包的基础层，被 data / model / inference / analysis 四组子命令共用

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from lungtex.atlas import (
    SPLIT_TAGS,
    Atlas,
    AtlasManifest,
    ManifestEntry,
    PatchSet,
    build_atlas,
    default_split_tags,
    load_patchset,
    split_scan_ids,
)
from lungtex.errors import InputValidationError
from lungtex.parallel import parallel_map

from lungquant.schemas import RunConfig
from lungquant.settings import CLISettings
from lungquant.utils.file_ops import ArtifactLayout, read_json, write_json

logger = logging.getLogger(__name__)


@dataclass
class CommandContext:
    """
    一次子命令调用的上下文

    Attributes:
        run: 已校验的运行配置
        layout: 输出目录布局
        settings: 进程级配置
        scans: 限定处理的扫描（classify / quantify），为空表示全部
        probabilities: evaluate 的预计算概率 CSV
        clinical: correlate 的临床 CSV
    """

    run: RunConfig
    layout: ArtifactLayout
    settings: CLISettings = field(default_factory=CLISettings)
    scans: List[str] = field(default_factory=list)
    probabilities: Optional[str] = None
    clinical: Optional[str] = None


@dataclass
class CommandResult:
    """
    子命令执行结果

    Attributes:
        command: 子命令名称
        outputs: 写出的产物路径（按写出顺序）
        summary: 供日志与测试检查的简要统计
    """

    command: str
    outputs: List[Path] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)

    def add(self, path: Path) -> Path:
        self.outputs.append(Path(path))
        logger.info(f"已写出: {path}")
        return path


# ============ 清单与图谱 ============

def load_manifest(ctx: CommandContext) -> AtlasManifest:
    """读取清单：paths.manifest 优先，否则为 <out>/manifest.json"""
    path = Path(ctx.run.paths.manifest) if ctx.run.paths.manifest else ctx.layout.manifest
    return AtlasManifest.from_file(path)


def selected_entries(ctx: CommandContext, manifest: AtlasManifest) -> List[ManifestEntry]:
    """按 --scan 选项筛选清单条目，未指定时返回全部"""
    if not ctx.scans:
        return list(manifest.entries)
    return [manifest.entry(scan_id) for scan_id in ctx.scans]


def load_atlas(manifest: AtlasManifest, scan_ids: Optional[Sequence[str]] = None) -> Atlas:
    """
    读取清单中已标注的扫描并构建图谱。

    Raises:
        InputValidationError: 没有任何已标注扫描
    """
    entries = [e for e in manifest.entries if e.labels]
    skipped = [e.scan_id for e in manifest.entries if not e.labels]
    if skipped:
        logger.warning(f"以下扫描没有标签掩膜，不参与图谱: {skipped}")
    if scan_ids is not None:
        wanted = set(scan_ids)
        entries = [e for e in entries if e.scan_id in wanted]
    if not entries:
        raise InputValidationError("清单中没有可用于图谱的已标注扫描")
    return build_atlas(parallel_map(manifest.load_labelled, entries))


# ============ 扫描划分 ============

def compute_splits(ctx: CommandContext, manifest: AtlasManifest, scan_ids: Sequence[str]) -> Dict[str, List[str]]:
    """
    计算扫描级划分。

    清单全部条目都指定了 split 且 split.use_pinned 为真时直接使用，
    否则按 split.fractions 以 "split" 流随机划分。
    """
    scan_ids = list(scan_ids)
    if ctx.run.split.use_pinned and manifest.has_pinned_splits():
        pinned = {e.scan_id: e.split for e in manifest.entries}
        groups = {tag: [s for s in scan_ids if pinned[s] == tag] for tag in SPLIT_TAGS}
        if not groups["train"]:
            raise InputValidationError("清单指定的划分中没有 train 扫描")
        logger.info("使用清单中指定的扫描划分")
        return {tag: ids for tag, ids in groups.items() if ids}

    fractions = ctx.run.split.fractions
    tags = default_split_tags(len(fractions))
    groups = split_scan_ids(scan_ids, fractions, ctx.run.rng_seed)
    return dict(zip(tags, groups))


def resolve_splits(ctx: CommandContext, manifest: AtlasManifest, scan_ids: Sequence[str]) -> Dict[str, List[str]]:
    """优先读取 sample 写出的 splits.json，不存在时重新计算"""
    if ctx.layout.splits.exists():
        data = read_json(ctx.layout.splits)
        return {tag: list(ids) for tag, ids in data.items()}
    return compute_splits(ctx, manifest, scan_ids)


def write_splits(ctx: CommandContext, splits: Dict[str, List[str]]) -> Path:
    return write_json(splits, ctx.layout.splits)


def model_path(ctx: CommandContext) -> Path:
    """推理使用的权重：paths.model 优先，否则为 <out>/model.tqwt"""
    return Path(ctx.run.paths.model) if ctx.run.paths.model else ctx.layout.model


def load_split_patchset(ctx: CommandContext, split: str) -> PatchSet:
    """读取 sample 写出的某个划分"""
    return load_patchset(ctx.layout.patchset_header(split))
