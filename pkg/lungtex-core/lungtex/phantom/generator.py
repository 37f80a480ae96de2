"""
程序化纹理体模生成

INPUT:  PhantomSpec
OUTPUT: Phantom 数据类, generate_phantom(), generate_cohort() 函数
POS:    桌面规模数据集的来源，提供精确的标签与肺掩膜真值

体模结构：体外空气 -> 软组织椭球 -> 肺椭球。肺体素按 (x, y, z)
字典序扫描，依次按精确计数划入各分区，得到连续的板状区域，
剩余体素为 NORMAL。各纹理的噪声由以 (种子, 纹理) 命名的
Philox 流按体素下标顺序生成，结果与线程调度无关。

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from lungtex import rng as rng_streams
from lungtex.errors import InputValidationError
from lungtex.parallel import parallel_map
from lungtex.phantom.spec import PhantomSpec, TextureParams
from lungtex.volume.types import LabelMask, LungMask, TextureLabel, Volume

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Phantom:
    """生成结果：体数据、标签掩膜、肺掩膜与逐类体素计数"""

    volume: Volume
    labels: LabelMask
    lung: LungMask
    census: Dict[TextureLabel, int]

    @property
    def lung_voxels(self) -> int:
        return int(sum(self.census.values()))

    def census_fractions(self) -> Dict[TextureLabel, float]:
        total = self.lung_voxels
        return {label: (count / total if total else 0.0) for label, count in self.census.items()}

    def census_dict(self) -> dict:
        """census JSON 表示"""
        return {
            "dims": list(self.volume.dims),
            "spacing_mm": list(self.volume.spacing),
            "lung_voxels": self.lung_voxels,
            "counts": {label.name: int(n) for label, n in self.census.items()},
            "fractions": {label.name: f for label, f in self.census_fractions().items()},
        }


def _ellipsoid(dims: Tuple[int, int, int], semi_axes_frac: Sequence[float]) -> np.ndarray:
    axes = [np.arange(n, dtype=np.float64) for n in dims]
    grids = np.meshgrid(*axes, indexing="ij", sparse=True)
    r2 = 0.0
    for g, n, frac in zip(grids, dims, semi_axes_frac):
        center = (n - 1) / 2.0
        r2 = r2 + ((g - center) / (frac * n)) ** 2
    return r2 <= 1.0


def _smooth_noise(gen: np.random.Generator, dims, sigma: float) -> np.ndarray:
    field = ndimage.gaussian_filter(gen.standard_normal(dims), sigma=sigma, mode="wrap")
    std = field.std()
    return field / std if std > 0 else field


def _texture_field(
    label: TextureLabel,
    params: TextureParams,
    dims: Tuple[int, int, int],
    coords: np.ndarray,
    seed: int,
    scan_id: str,
) -> np.ndarray:
    """计算某一纹理在给定体素坐标处的 HU 值"""
    gen = rng_streams.stream(seed, "phantom", scan_id, label.name)
    i, j, k = coords.T

    if label in (TextureLabel.NORMAL, TextureLabel.GG):
        noise = _smooth_noise(gen, dims, params.scale_vox)
        return params.base_hu + params.noise_hu * noise[i, j, k]

    if label == TextureLabel.GGR:
        # 毛玻璃基底 + 扭曲的面内网状线
        base = _smooth_noise(gen, dims, 2.0)
        warp_x = 1.5 * _smooth_noise(gen, dims, 3.0)
        warp_y = 1.5 * _smooth_noise(gen, dims, 3.0)
        period = params.scale_vox
        on_x = np.mod(i + warp_x[i, j, k], period) < params.feature_width_vox
        on_y = np.mod(j + warp_y[i, j, k], period) < params.feature_width_vox
        values = params.base_hu + params.noise_hu * base[i, j, k]
        return np.where(on_x | on_y, params.feature_hu + 0.5 * params.noise_hu * base[i, j, k], values)

    if label == TextureLabel.HONEYCOMBING:
        # 抖动网格上的囊泡中心，最近两中心距离差小于壁厚处为囊壁
        spacing = params.scale_vox
        counts = [int(np.ceil(n / spacing)) + 1 for n in dims]
        cells = np.stack(
            np.meshgrid(*[np.arange(c, dtype=np.float64) for c in counts], indexing="ij"), axis=-1
        ).reshape(-1, 3)
        seeds = (cells + 0.5) * spacing + gen.uniform(-0.3, 0.3, size=cells.shape) * spacing
        white = gen.standard_normal(dims)
        if len(coords) == 0:
            return np.empty(0)
        dist, _ = cKDTree(seeds).query(coords.astype(np.float64), k=2)
        wall = (dist[:, 1] - dist[:, 0]) < params.feature_width_vox
        hu = np.where(wall, params.feature_hu, params.base_hu)
        return hu + params.noise_hu * white[i, j, k]

    if label == TextureLabel.EMPHYSEMA:
        # 低密度基底，平滑场过零处为稀疏间隔
        white = gen.standard_normal(dims)
        septa_field = _smooth_noise(gen, dims, params.scale_vox)
        septa = np.abs(septa_field[i, j, k]) < params.feature_width_vox
        hu = np.where(septa, params.feature_hu, params.base_hu)
        return hu + params.noise_hu * white[i, j, k]

    raise ValueError(f"未知纹理: {label}")


def generate_phantom(spec: PhantomSpec, scan_id: str = "") -> Phantom:
    """
    生成一个纹理体模。

    随机流按 ("phantom", scan_id, 纹理) 派生，同一种子下不同扫描的纹理互不相同。

    Args:
        spec: 体模规格（分区比例之和 <= 1，在构造时校验）
        scan_id: 扫描 ID

    Returns:
        Phantom，包含 Volume、LabelMask、LungMask 与精确的逐类体素计数
    """
    dims = tuple(int(n) for n in spec.dims)
    body = _ellipsoid(dims, spec.body_semi_axes)
    lung = _ellipsoid(dims, spec.lung_semi_axes)

    # C 序展平即 (x, y, z) 字典序
    lung_flat = np.flatnonzero(lung.ravel(order="C"))
    n_lung = len(lung_flat)

    codes_flat = np.zeros(int(np.prod(dims)), dtype=np.uint8)
    codes_flat[lung_flat] = int(TextureLabel.NORMAL)
    start = 0
    for label, fraction in spec.compartments:
        count = min(int(round(fraction * n_lung)), n_lung - start)
        codes_flat[lung_flat[start:start + count]] = int(label)
        start += count
    codes = codes_flat.reshape(dims, order="C")

    gen_body = rng_streams.stream(spec.rng_seed, "phantom", scan_id, "body")
    hu = np.where(body, spec.body_hu, spec.air_hu) + 10.0 * gen_body.standard_normal(dims)
    for label in TextureLabel:
        coords = np.argwhere(codes == int(label))
        if len(coords) == 0:
            continue
        values = _texture_field(label, spec.textures[label], dims, coords, spec.rng_seed, scan_id)
        hu[coords[:, 0], coords[:, 1], coords[:, 2]] = values

    volume = Volume(data=hu, spacing=spec.spacing)
    labels = LabelMask(codes=codes, spacing=spec.spacing)
    lung_mask = LungMask(membership=lung, spacing=spec.spacing)
    census = {label: labels.count(label) for label in TextureLabel}

    logger.info(
        f"体模生成完成: dims={dims}, 肺体素={n_lung}, "
        + ", ".join(f"{label.name}={census[label]}" for label in TextureLabel)
    )
    return Phantom(volume=volume, labels=labels, lung=lung_mask, census=census)


def generate_cohort(specs: Sequence[Tuple[str, PhantomSpec]]) -> List[Tuple[str, Phantom]]:
    """
    并行生成一组体模。

    Args:
        specs: (scan_id, PhantomSpec) 序列

    Returns:
        与输入顺序一致的 (scan_id, Phantom) 列表
    """
    scan_ids = [scan_id for scan_id, _ in specs]
    if len(set(scan_ids)) != len(scan_ids):
        raise InputValidationError(f"scan_id 重复: {scan_ids}")
    phantoms = parallel_map(lambda item: generate_phantom(item[1], scan_id=item[0]), specs)
    return list(zip(scan_ids, phantoms))
