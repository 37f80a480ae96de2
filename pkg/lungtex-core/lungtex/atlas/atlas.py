"""
纹理图谱

INPUT:  (scan_id, Volume, LabelMask) 列表
OUTPUT: AtlasEntry, Atlas 数据类, build_atlas() 函数
POS:    patch 采样的数据源，每个扫描按类别保存候选中心体素

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from lungtex.errors import InputValidationError
from lungtex.parallel import parallel_map
from lungtex.volume.types import LabelMask, TextureLabel, Volume, check_congruent

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AtlasEntry:
    """单个扫描：体数据、标签掩膜与逐类候选体素（(M, 3) 下标，x 最快顺序）"""

    scan_id: str
    volume: Volume
    labels: LabelMask
    candidates: Dict[TextureLabel, np.ndarray]

    def candidate_count(self, label: TextureLabel) -> int:
        return int(len(self.candidates[label]))


@dataclass(frozen=True, eq=False)
class Atlas:
    """纹理图谱：按扫描顺序排列的 AtlasEntry"""

    entries: Tuple[AtlasEntry, ...]

    @property
    def scan_ids(self) -> List[str]:
        return [entry.scan_id for entry in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def entry(self, scan_id: str) -> AtlasEntry:
        for entry in self.entries:
            if entry.scan_id == scan_id:
                return entry
        raise KeyError(scan_id)

    def candidate_count(self, label: TextureLabel) -> int:
        return sum(entry.candidate_count(label) for entry in self.entries)

    def scans_with_class(self, label: TextureLabel) -> int:
        """含有该类候选的扫描数"""
        return sum(1 for entry in self.entries if entry.candidate_count(label) > 0)

    def subset(self, scan_ids: Iterable[str]) -> "Atlas":
        """按给定扫描构建子图谱（保持原扫描顺序）"""
        wanted = set(scan_ids)
        unknown = wanted - set(self.scan_ids)
        if unknown:
            raise InputValidationError(f"图谱中不存在的扫描: {sorted(unknown)}")
        return Atlas(entries=tuple(e for e in self.entries if e.scan_id in wanted))

    def summary(self) -> Dict[str, Dict[str, int]]:
        """每个扫描每类候选数"""
        return {
            entry.scan_id: {label.name: entry.candidate_count(label) for label in TextureLabel}
            for entry in self.entries
        }


def _enumerate_candidates(labels: LabelMask) -> Dict[TextureLabel, np.ndarray]:
    # Fortran 序展平即 x 最快的体素顺序
    flat_codes = labels.codes.ravel(order="F")
    candidates = {}
    for label in TextureLabel:
        flat = np.flatnonzero(flat_codes == int(label))
        coords = np.unravel_index(flat, labels.dims, order="F")
        candidates[label] = np.stack(coords, axis=1).astype(np.int64)
    return candidates


def build_atlas(scans: Sequence[Tuple[str, Volume, LabelMask]]) -> Atlas:
    """
    将已标注扫描汇编为纹理图谱。

    Args:
        scans: (scan_id, Volume, LabelMask) 序列

    Returns:
        Atlas，候选按扫描顺序、再按 x 最快的体素顺序排列

    Raises:
        GridMismatchError: 标签掩膜与体数据网格不一致
        InputValidationError: scan_id 重复
    """
    seen = set()
    for scan_id, volume, labels in scans:
        if scan_id in seen:
            raise InputValidationError(f"scan_id 重复: {scan_id}")
        seen.add(scan_id)
        check_congruent(volume, labels, what=f"扫描 {scan_id} 的标签掩膜")

    candidate_maps = parallel_map(lambda item: _enumerate_candidates(item[2]), scans)
    entries = tuple(
        AtlasEntry(scan_id=scan_id, volume=volume, labels=labels, candidates=candidates)
        for (scan_id, volume, labels), candidates in zip(scans, candidate_maps)
    )
    atlas = Atlas(entries=entries)

    logger.info(
        f"图谱构建完成: {len(entries)} 个扫描, "
        + ", ".join(f"{label.name}={atlas.candidate_count(label)}" for label in TextureLabel)
    )
    return atlas
