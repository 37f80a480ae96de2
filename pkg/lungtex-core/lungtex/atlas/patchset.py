"""
Patch 集合与按扫描划分

INPUT:  patch 张量 / 标签 / 原点 / 扫描来源 / 填充率, 划分比例
OUTPUT: PatchRecord, PatchSet 数据类, split_scan_ids(), split_patchset(), default_split_tags() 函数
POS:    采样结果的不可变容器，在训练、评估、归档之间传递

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import logging
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from lungtex import rng as rng_streams
from lungtex.atlas.manifest import SPLIT_TAGS
from lungtex.atlas.spec import PatchSpec
from lungtex.errors import InputValidationError
from lungtex.volume.types import TextureLabel

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PatchRecord:
    """单个 patch"""

    tensor: np.ndarray
    label: TextureLabel
    origin: Tuple[int, int, int]
    scan_id: str
    fill: float


@dataclass(frozen=True, eq=False)
class PatchSet:
    """
    patch 集合（列式存储）

    Attributes:
        spec: 产生该集合的 PatchSpec
        tensors: (M, *tensor_shape) float32 HU
        labels: (M,) uint8 纹理编码
        origins: (M, 3) int64 中心体素
        scan_ids: 每个 patch 的来源扫描
        fills: (M,) 实际填充率
        split_tag: train / validation / test / external_test
    """

    spec: PatchSpec
    tensors: np.ndarray
    labels: np.ndarray
    origins: np.ndarray
    scan_ids: Tuple[str, ...]
    fills: np.ndarray
    split_tag: str = "train"

    def __post_init__(self):
        n = len(self.labels)
        if not (len(self.tensors) == len(self.origins) == len(self.scan_ids) == len(self.fills) == n):
            raise InputValidationError("PatchSet 各列长度不一致")
        if self.split_tag not in SPLIT_TAGS:
            raise InputValidationError(f"未知的划分标签: {self.split_tag}")
        object.__setattr__(self, "scan_ids", tuple(self.scan_ids))
        for name in ("tensors", "labels", "origins", "fills"):
            getattr(self, name).setflags(write=False)

    def __len__(self) -> int:
        return int(len(self.labels))

    @property
    def records(self) -> List[PatchRecord]:
        return [
            PatchRecord(
                tensor=self.tensors[i],
                label=TextureLabel(int(self.labels[i])),
                origin=tuple(int(c) for c in self.origins[i]),
                scan_id=self.scan_ids[i],
                fill=float(self.fills[i]),
            )
            for i in range(len(self))
        ]

    @property
    def scan_set(self) -> List[str]:
        """来源扫描，按首次出现顺序"""
        return list(dict.fromkeys(self.scan_ids))

    def class_counts(self) -> Dict[TextureLabel, int]:
        return {label: int(np.count_nonzero(self.labels == int(label))) for label in TextureLabel}

    def is_balanced(self) -> bool:
        return len(set(self.class_counts().values())) == 1

    def select(self, index: np.ndarray, split_tag: Optional[str] = None) -> "PatchSet":
        """按下标或布尔掩码取子集"""
        index = np.asarray(index)
        if index.dtype == bool:
            index = np.flatnonzero(index)
        index = index.astype(np.int64)
        return PatchSet(
            spec=self.spec,
            tensors=self.tensors[index],
            labels=self.labels[index],
            origins=self.origins[index],
            scan_ids=tuple(self.scan_ids[i] for i in index),
            fills=self.fills[index],
            split_tag=split_tag or self.split_tag,
        )

    def with_tag(self, split_tag: str) -> "PatchSet":
        return replace(self, split_tag=split_tag)

    @classmethod
    def concatenate(cls, sets: Sequence["PatchSet"], split_tag: str = "train") -> "PatchSet":
        """合并同规格的多个集合"""
        if not sets:
            raise InputValidationError("没有可合并的 PatchSet")
        return cls(
            spec=sets[0].spec,
            tensors=np.concatenate([s.tensors for s in sets]),
            labels=np.concatenate([s.labels for s in sets]),
            origins=np.concatenate([s.origins for s in sets]),
            scan_ids=tuple(sid for s in sets for sid in s.scan_ids),
            fills=np.concatenate([s.fills for s in sets]),
            split_tag=split_tag,
        )


def default_split_tags(n_splits: int) -> Tuple[str, ...]:
    """2 -> (train, validation)；3 -> (+test)；4 -> (+external_test)"""
    if not 2 <= n_splits <= len(SPLIT_TAGS):
        raise InputValidationError(f"划分数必须在 2..{len(SPLIT_TAGS)} 之间，当前为 {n_splits}")
    return SPLIT_TAGS[:n_splits]


def _allocate(n_items: int, fractions: Sequence[float]) -> List[int]:
    raw = [f * n_items for f in fractions]
    counts = [int(np.floor(r)) for r in raw]
    remainder = n_items - sum(counts)
    by_fraction = sorted(range(len(raw)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in by_fraction[:remainder]:
        counts[i] += 1
    # 每个划分至少一个扫描
    for i in range(len(counts)):
        if counts[i] == 0:
            donor = max(range(len(counts)), key=lambda d: (counts[d], -d))
            counts[donor] -= 1
            counts[i] += 1
    return counts


def split_scan_ids(scan_ids: Sequence[str], fractions: Sequence[float], seed: int) -> List[List[str]]:
    """
    按比例在扫描层面随机划分。

    Args:
        scan_ids: 扫描 ID（顺序决定划分前的排列基准）
        fractions: 各划分比例，和为 1
        seed: 划分种子（"split" 流）

    Returns:
        每个划分的扫描 ID 列表

    Raises:
        InputValidationError: 比例和不为 1、比例非正或扫描数少于划分数
    """
    fractions = [float(f) for f in fractions]
    if len(fractions) < 2:
        raise InputValidationError("至少需要两个划分")
    if any(f <= 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-6:
        raise InputValidationError(f"划分比例必须为正且和为 1: {fractions}")
    if len(scan_ids) < len(fractions):
        raise InputValidationError(
            f"扫描数 ({len(scan_ids)}) 少于划分数 ({len(fractions)})，无法按扫描划分"
        )

    order = rng_streams.stream(seed, "split").permutation(len(scan_ids))
    shuffled = [scan_ids[i] for i in order]
    groups, start = [], 0
    for count in _allocate(len(scan_ids), fractions):
        groups.append(shuffled[start:start + count])
        start += count
    return groups


def split_patchset(
    patchset: PatchSet,
    fractions: Sequence[float],
    seed: int,
    tags: Optional[Sequence[str]] = None,
) -> Tuple[PatchSet, ...]:
    """
    按扫描划分 PatchSet，任何扫描只会出现在一个划分中。

    Args:
        patchset: 待划分集合
        fractions: 各划分比例，和为 1
        seed: 划分种子
        tags: 各划分的标签，默认见 default_split_tags()

    Returns:
        与 fractions 一一对应的 PatchSet 元组
    """
    tags = tuple(tags) if tags is not None else default_split_tags(len(fractions))
    if len(tags) != len(fractions):
        raise InputValidationError("tags 与 fractions 数量不一致")

    groups = split_scan_ids(patchset.scan_set, fractions, seed)
    parts = []
    for tag, group in zip(tags, groups):
        members = set(group)
        mask = np.array([sid in members for sid in patchset.scan_ids], dtype=bool)
        parts.append(patchset.select(mask, split_tag=tag))
        logger.info(f"划分 {tag}: {len(group)} 个扫描, {int(mask.sum())} 个 patch")
    return tuple(parts)
