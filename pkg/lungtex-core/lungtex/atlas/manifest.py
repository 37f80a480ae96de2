"""
图谱清单

INPUT:  清单 JSON 文件（扫描 ID、RVOL 路径、可选划分标签）
OUTPUT: ManifestEntry, AtlasManifest 数据类
POS:    CLI 与库之间的扫描索引，phantom 子命令写出，atlas/sample/classify 读取

清单格式：
    {"scans": [{"scan_id": "...", "volume": "x.rvol.json", "labels": "x_labels.rvol.json",
                "lung": "x_lung.rvol.json", "split": "train"}]}
路径相对于清单所在目录；labels / lung / split 可省略。
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

from lungtex.errors import InputValidationError
from lungtex.volume.lung_mask import threshold_lung_mask
from lungtex.volume.rvol import load_label_mask, load_lung_mask, load_volume
from lungtex.volume.types import LabelMask, LungMask, Volume, check_congruent

logger = logging.getLogger(__name__)

SPLIT_TAGS = ("train", "validation", "test", "external_test")


@dataclass(frozen=True)
class ManifestEntry:
    scan_id: str
    volume: str
    labels: Optional[str] = None
    lung: Optional[str] = None
    split: Optional[str] = None

    def __post_init__(self):
        if not self.scan_id:
            raise InputValidationError("清单条目缺少 scan_id")
        if self.split is not None and self.split not in SPLIT_TAGS:
            raise InputValidationError(f"扫描 {self.scan_id} 的划分标签非法: {self.split}")

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass
class AtlasManifest:
    """扫描清单"""

    entries: List[ManifestEntry] = field(default_factory=list)
    root: Path = field(default_factory=Path)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "AtlasManifest":
        path = Path(path)
        if not path.exists():
            raise InputValidationError(f"清单文件不存在: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            entries = [ManifestEntry(**item) for item in data["scans"]]
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise InputValidationError(f"清单文件格式错误 {path}: {e}") from e

        ids = [e.scan_id for e in entries]
        if len(set(ids)) != len(ids):
            raise InputValidationError(f"清单中 scan_id 重复: {ids}")
        return cls(entries=entries, root=path.parent)

    def to_file(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {"scans": [entry.to_dict() for entry in self.entries]}
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        return path

    @property
    def scan_ids(self) -> List[str]:
        return [entry.scan_id for entry in self.entries]

    def entry(self, scan_id: str) -> ManifestEntry:
        for entry in self.entries:
            if entry.scan_id == scan_id:
                return entry
        raise InputValidationError(f"清单中不存在扫描: {scan_id}")

    def has_pinned_splits(self) -> bool:
        """全部条目都显式指定了划分"""
        return bool(self.entries) and all(entry.split for entry in self.entries)

    def _resolve(self, relative: str) -> Path:
        return self.root / relative

    def load_volume(self, entry: ManifestEntry) -> Volume:
        return load_volume(self._resolve(entry.volume))

    def load_labelled(self, entry: ManifestEntry) -> Tuple[str, Volume, LabelMask]:
        """读取已标注扫描，供 build_atlas 使用"""
        if not entry.labels:
            raise InputValidationError(f"扫描 {entry.scan_id} 缺少标签掩膜")
        volume = self.load_volume(entry)
        labels = load_label_mask(self._resolve(entry.labels))
        return entry.scan_id, volume, labels

    def load_lung(self, entry: ManifestEntry, volume: Volume) -> LungMask:
        """读取肺掩膜；未提供时退回阈值分割"""
        if entry.lung:
            lung = load_lung_mask(self._resolve(entry.lung))
            check_congruent(volume, lung, what=f"扫描 {entry.scan_id} 的肺掩膜")
            return lung
        logger.warning(f"扫描 {entry.scan_id} 未提供肺掩膜，使用阈值分割")
        return threshold_lung_mask(volume)
