"""
平衡、去相关的 patch 采样

INPUT:  Atlas, PatchSpec, 可选的每类数量覆盖
OUTPUT: sample_patches(), feasible_centers(), verify_patchset() 函数
POS:    patch-atlas 的核心算法，被 CLI sample 子命令与超参数搜索调用

算法：
1. 对每个扫描、每个类别，筛出足迹在界内且填充率 >= min_fill_factor 的候选；
2. 以 ("sample", scan_id, 类别) 流对候选做随机排列，依次贪心接受与已接受
   中心不冲突的候选（排除椭球 Σ((Δ·spacing)/r)² <= 1 视为冲突），
   每个扫描至多接受 patches_per_class 个；
3. 每类可行总数取各扫描之和，输出数量 n = min(请求数, 各类可行数最小值)；
4. 以 ("select", 类别) 流从每类的接受池中抽取 n 个，按 (扫描顺序, 接受顺序) 输出。
排除只在同一扫描、同一类别内生效。

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from lungtex import rng as rng_streams
from lungtex.atlas.atlas import Atlas, AtlasEntry
from lungtex.atlas.extraction import extract_patch, fill_factor, footprint_label_counts, in_bounds_mask
from lungtex.atlas.patchset import PatchSet
from lungtex.atlas.spec import PatchSpec
from lungtex.errors import InfeasibleSamplingError
from lungtex.parallel import parallel_map
from lungtex.volume.geometry import ellipsoid_offsets, mm_to_voxel_radius
from lungtex.volume.types import TextureLabel

logger = logging.getLogger(__name__)

# 排除椭球体素偏移数超过该值时改为逐中心距离判断
_MAX_STAMP_OFFSETS = 200_000

# 浮点比较容差
_FILL_EPS = 1e-9


def feasible_centers(entry: AtlasEntry, label: TextureLabel, spec: PatchSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    单个扫描中某类的可行中心（足迹在界内且填充率达标）。

    Returns:
        (centers (M, 3) int64, fills (M,) float64)，保持候选原有顺序
    """
    candidates = entry.candidates[label]
    if len(candidates) == 0:
        return candidates, np.empty(0)

    inside = in_bounds_mask(entry.labels.dims, candidates, spec)
    centers = candidates[inside]
    if len(centers) == 0:
        return centers, np.empty(0)

    counts = footprint_label_counts(entry.labels.codes, label, spec)
    hits = counts[centers[:, 0], centers[:, 1], centers[:, 2]]
    fills = hits / spec.footprint_size
    ok = hits >= spec.min_fill_factor * spec.footprint_size - _FILL_EPS
    return centers[ok], fills[ok]


def _greedy_accept(
    entry: AtlasEntry,
    centers: np.ndarray,
    spec: PatchSpec,
    label: TextureLabel,
    cap: int,
) -> np.ndarray:
    """随机顺序贪心接受，返回被接受候选在 centers 中的下标（接受顺序）"""
    if len(centers) == 0:
        return np.empty(0, dtype=np.int64)

    order = rng_streams.stream(spec.rng_seed, "sample", entry.scan_id, label.name).permutation(len(centers))
    radii = mm_to_voxel_radius(entry.volume.spacing, spec.selection_radius_mm)
    dims = np.asarray(entry.labels.dims)

    n_offsets = np.prod([2 * np.floor(r) + 1 for r in radii])
    accepted: List[int] = []

    if n_offsets <= _MAX_STAMP_OFFSETS:
        offsets = ellipsoid_offsets(radii)
        blocked = np.zeros(entry.labels.dims, dtype=bool)
        for idx in order:
            i, j, k = centers[idx]
            if blocked[i, j, k]:
                continue
            accepted.append(int(idx))
            if len(accepted) >= cap:
                break
            pts = centers[idx] + offsets
            pts = pts[np.all((pts >= 0) & (pts < dims), axis=1)]
            blocked[pts[:, 0], pts[:, 1], pts[:, 2]] = True
    else:
        radii_arr = np.asarray(radii)
        chosen = np.empty((0, 3), dtype=np.float64)
        for idx in order:
            c = centers[idx]
            if len(chosen) and np.any(np.sum(((chosen - c) / radii_arr) ** 2, axis=1) <= 1.0):
                continue
            accepted.append(int(idx))
            if len(accepted) >= cap:
                break
            chosen = np.vstack([chosen, c[None, :]])

    return np.asarray(accepted, dtype=np.int64)


def _sample_scan(entry: AtlasEntry, spec: PatchSpec, cap: int) -> Dict[TextureLabel, Tuple[np.ndarray, np.ndarray]]:
    pools = {}
    for label in TextureLabel:
        centers, fills = feasible_centers(entry, label, spec)
        idx = _greedy_accept(entry, centers, spec, label, cap)
        pools[label] = (centers[idx], fills[idx])
        logger.debug(
            f"扫描 {entry.scan_id} {label.name}: 候选 {entry.candidate_count(label)}, "
            f"可行 {len(centers)}, 接受 {len(idx)}"
        )
    return pools


def sample_patches(atlas: Atlas, spec: PatchSpec, per_class_override: Optional[int] = None) -> PatchSet:
    """
    从图谱中采样类别平衡的 patch 集合。

    Args:
        atlas: 纹理图谱
        spec: patch 规格（含 rng_seed）
        per_class_override: 覆盖 spec.patches_per_class

    Returns:
        split_tag 为 train 的 PatchSet，各类数量相等

    Raises:
        InfeasibleSamplingError: 图谱中某类没有候选，或没有任何可行候选
    """
    requested = int(per_class_override or spec.patches_per_class)
    for label in TextureLabel:
        if atlas.candidate_count(label) == 0:
            raise InfeasibleSamplingError(f"图谱中没有 {label.name} 的标注体素")

    scan_pools = parallel_map(lambda entry: _sample_scan(entry, spec, requested), atlas.entries)

    feasible = {
        label: sum(len(pools[label][0]) for pools in scan_pools) for label in TextureLabel
    }
    empty = [label.name for label, n in feasible.items() if n == 0]
    if empty:
        raise InfeasibleSamplingError(f"以下类别没有可行候选: {empty} (spec={spec.to_dict()})")
    n_per_class = min(requested, min(feasible.values()))

    tensors, labels, origins, scan_ids, fills = [], [], [], [], []
    for label in TextureLabel:
        pool_scans = np.concatenate([
            np.full(len(pools[label][0]), s, dtype=np.int64) for s, pools in enumerate(scan_pools)
        ])
        pool_centers = np.concatenate([pools[label][0] for pools in scan_pools])
        pool_fills = np.concatenate([pools[label][1] for pools in scan_pools])

        if len(pool_centers) > n_per_class:
            chosen = rng_streams.stream(spec.rng_seed, "select", label.name).choice(
                len(pool_centers), size=n_per_class, replace=False
            )
            chosen.sort()
        else:
            chosen = np.arange(len(pool_centers))

        for p in chosen:
            entry = atlas.entries[int(pool_scans[p])]
            center = tuple(int(c) for c in pool_centers[p])
            tensors.append(extract_patch(entry.volume, center, spec))
            labels.append(int(label))
            origins.append(center)
            scan_ids.append(entry.scan_id)
            fills.append(float(pool_fills[p]))

    logger.info(
        f"采样完成: 每类 {n_per_class} 个 patch (请求 {requested}), "
        + ", ".join(f"{label.name} 可行 {feasible[label]}" for label in TextureLabel)
    )
    return PatchSet(
        spec=spec,
        tensors=np.stack(tensors).astype(np.float32),
        labels=np.asarray(labels, dtype=np.uint8),
        origins=np.asarray(origins, dtype=np.int64).reshape(-1, 3),
        scan_ids=tuple(scan_ids),
        fills=np.asarray(fills, dtype=np.float64),
        split_tag="train",
    )


def verify_patchset(atlas: Atlas, patchset: PatchSet, require_balance: bool = True) -> List[str]:
    """
    事后复核 PatchSet 的全部不变式。

    检查中心标签、填充率（逐体素重新计算）、同扫描同类别的排除椭球，
    以及（可选）类别平衡。

    Returns:
        违规描述列表，为空表示全部通过
    """
    spec = patchset.spec
    violations: List[str] = []

    for n, record in enumerate(patchset.records):
        entry = atlas.entry(record.scan_id)
        i, j, k = record.origin
        if entry.labels.codes[i, j, k] != int(record.label):
            violations.append(f"#{n} 中心标签不符: {record.origin}")
        fill = fill_factor(entry.labels, record.origin, spec, record.label)
        if fill < spec.min_fill_factor - _FILL_EPS:
            violations.append(f"#{n} 填充率 {fill:.4f} < {spec.min_fill_factor}")

    scan_array = np.asarray(patchset.scan_ids)
    for scan_id in patchset.scan_set:
        radii = np.asarray(mm_to_voxel_radius(atlas.entry(scan_id).volume.spacing, spec.selection_radius_mm))
        for label in TextureLabel:
            sel = (scan_array == scan_id) & (patchset.labels == int(label))
            pts = patchset.origins[sel].astype(np.float64)
            if len(pts) < 2:
                continue
            d2 = np.sum(((pts[:, None, :] - pts[None, :, :]) / radii) ** 2, axis=-1)
            close = np.argwhere(np.triu(d2 <= 1.0, k=1))
            for a, b in close:
                violations.append(f"扫描 {scan_id} {label.name} 中心过近: 第 {a} 与第 {b} 个")

    if require_balance and not patchset.is_balanced():
        violations.append(f"类别不平衡: {patchset.class_counts()}")

    return violations
