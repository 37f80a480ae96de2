"""
patch-atlas: 纹理图谱与 patch 采样

INPUT:  Volume / LabelMask
OUTPUT: PatchSpec, Atlas, PatchSet 及采样、提取、划分、归档函数
POS:    数据准备层，被 classifier、reconstruct 与 CLI 调用
"""

from lungtex.atlas.spec import (
    Dimensionality,
    PatchSpec,
    tensor_shape,
    EVALUATION_MIN_FILL,
    OPTIMAL_PATCH_SPEC,
)
from lungtex.atlas.atlas import Atlas, AtlasEntry, build_atlas
from lungtex.atlas.manifest import AtlasManifest, ManifestEntry, SPLIT_TAGS
from lungtex.atlas.extraction import (
    extract_patch,
    fill_factor,
    footprint_in_bounds,
    footprint_label_counts,
)
from lungtex.atlas.patchset import (
    PatchRecord,
    PatchSet,
    default_split_tags,
    split_patchset,
    split_scan_ids,
)
from lungtex.atlas.sampling import feasible_centers, sample_patches, verify_patchset
from lungtex.atlas.archive import load_patchset, save_patchset

__all__ = [
    # 规格
    "Dimensionality",
    "PatchSpec",
    "tensor_shape",
    "EVALUATION_MIN_FILL",
    "OPTIMAL_PATCH_SPEC",
    # 图谱
    "Atlas",
    "AtlasEntry",
    "build_atlas",
    "AtlasManifest",
    "ManifestEntry",
    "SPLIT_TAGS",
    # 提取
    "extract_patch",
    "fill_factor",
    "footprint_in_bounds",
    "footprint_label_counts",
    # 集合与划分
    "PatchRecord",
    "PatchSet",
    "default_split_tags",
    "split_patchset",
    "split_scan_ids",
    # 采样
    "feasible_centers",
    "sample_patches",
    "verify_patchset",
    # 归档
    "load_patchset",
    "save_patchset",
]
