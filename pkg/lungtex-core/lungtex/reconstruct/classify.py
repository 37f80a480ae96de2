"""
滑动窗口分类重建

INPUT:  PatchClassifier（如 TorchPatchClassifier）, Volume, LungMask, ReconstructionConfig
OUTPUT: PatchClassifier 协议, ReconstructionConfig, ClassificationMap 类,
        grid_origins(), classify_volume() 函数
POS:    reconstruct-quantify 的第一步：把逐 patch 预测写回为粗粒度类别体

网格原点 g 锚定在肺包围盒最小角，步长 stride；每个原点负责写回块 [g, g+stride)。
块与肺相交的原点被保留，patch 以块中心 g + ⌊stride/2⌋ 为中心提取（足迹越界时向内钳制），
argmax 类别写回块内的肺体素，因此每个肺体素恰好被一个块覆盖。

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import logging
from dataclasses import dataclass
from typing import Optional, Protocol, Tuple, runtime_checkable

import numpy as np

from lungtex.atlas.extraction import extract_patch
from lungtex.atlas.spec import Dimensionality, PatchSpec
from lungtex.config import get_config
from lungtex.errors import InputValidationError
from lungtex.parallel import parallel_map
from lungtex.volume.types import NUM_CLASSES, LabelMask, LungMask, Volume, check_congruent

logger = logging.getLogger(__name__)

DEFAULT_STRIDE = (8, 8, 1)


@runtime_checkable
class PatchClassifier(Protocol):
    """重建所需的最小分类器接口"""

    @property
    def input_size_px(self) -> int: ...

    @property
    def dimensionality(self) -> Dimensionality: ...

    def predict_proba(self, tensors: np.ndarray) -> np.ndarray:
        """HU patch 批次 (B, *tensor_shape) -> (B, 5) 概率"""
        ...


@dataclass(frozen=True)
class ReconstructionConfig:
    """
    Attributes:
        stride: 网格步长 (x, y, z)，体素
        batch_size: 每批分类的 patch 数，None 时取全局配置
    """

    stride: Tuple[int, int, int] = DEFAULT_STRIDE
    batch_size: Optional[int] = None

    def __post_init__(self):
        stride = tuple(int(s) for s in self.stride)
        if len(stride) != 3 or any(s < 1 for s in stride):
            raise InputValidationError(f"stride 必须为 3 个 >= 1 的整数: {self.stride}")
        object.__setattr__(self, "stride", stride)
        if self.batch_size is not None and self.batch_size < 1:
            raise InputValidationError(f"batch_size 必须 >= 1: {self.batch_size}")


@dataclass(frozen=True, eq=False)
class ClassificationMap:
    """
    粗粒度类别体

    Attributes:
        labels: 与体数据同网格的类别编码，肺外为 0
        origins: 被分类的网格原点 (M, 3)
        predictions: 每个原点的预测编码 (M,)
    """

    labels: LabelMask
    origins: np.ndarray
    predictions: np.ndarray

    @property
    def codes(self) -> np.ndarray:
        return self.labels.codes

    @property
    def spacing(self):
        return self.labels.spacing

    @property
    def patch_count(self) -> int:
        return int(len(self.origins))


def grid_origins(lung: LungMask, stride: Tuple[int, int, int]) -> np.ndarray:
    """
    保留块与肺相交的网格原点，按 (x, y, z) 字典序返回 (M, 3)。
    """
    membership = lung.membership
    nonzero = np.nonzero(membership)
    if len(nonzero[0]) == 0:
        return np.zeros((0, 3), dtype=np.int64)
    lo = np.array([axis.min() for axis in nonzero], dtype=np.int64)
    hi = np.array([axis.max() for axis in nonzero], dtype=np.int64)
    stride_arr = np.asarray(stride, dtype=np.int64)

    counts = (hi - lo) // stride_arr + 1
    padded = np.zeros(tuple(counts * stride_arr), dtype=bool)
    box = membership[lo[0]:hi[0] + 1, lo[1]:hi[1] + 1, lo[2]:hi[2] + 1]
    padded[:box.shape[0], :box.shape[1], :box.shape[2]] = box
    blocks = padded.reshape(counts[0], stride[0], counts[1], stride[1], counts[2], stride[2])
    occupied = blocks.any(axis=(1, 3, 5))
    return lo + np.argwhere(occupied).astype(np.int64) * stride_arr


def _patch_centers(origins: np.ndarray, dims, stride, spec: PatchSpec) -> np.ndarray:
    centers = origins + np.asarray(stride, dtype=np.int64) // 2
    dims = np.asarray(dims, dtype=np.int64)
    centers = np.minimum(centers, dims - 1)
    used = (0, 1) if spec.dimensionality == Dimensionality.TWO_D else (0, 1, 2)
    for axis in used:
        centers[:, axis] = np.clip(centers[:, axis], spec.half, dims[axis] - spec.size_px + spec.half)
    return centers


def classify_volume(
    model: PatchClassifier,
    volume: Volume,
    lung: LungMask,
    cfg: Optional[ReconstructionConfig] = None,
) -> ClassificationMap:
    """
    在肺内步进网格上分类 patch 并写回类别块。

    Args:
        model: patch 分类器
        volume: CT 体数据
        lung: 肺掩膜（与体数据同网格）
        cfg: 重建配置

    Returns:
        ClassificationMap，非零体素恰为肺体素

    Raises:
        InputValidationError: 肺掩膜为空、网格不一致或模型输入尺寸大于体数据
    """
    cfg = cfg or ReconstructionConfig()
    check_congruent(volume, lung, "肺掩膜")
    if lung.voxel_count == 0:
        raise InputValidationError("肺掩膜为空，无法重建")

    spec = PatchSpec(size_px=model.input_size_px, dimensionality=model.dimensionality)
    used = (0, 1) if spec.dimensionality == Dimensionality.TWO_D else (0, 1, 2)
    if any(volume.dims[axis] < spec.size_px for axis in used):
        raise InputValidationError(
            f"模型输入 {spec.dimensionality.value} N={spec.size_px} 超出体数据尺寸 {volume.dims}"
        )

    origins = grid_origins(lung, cfg.stride)
    centers = _patch_centers(origins, volume.dims, cfg.stride, spec)
    batch_size = cfg.batch_size or get_config().inference_batch_size
    logger.info(
        f"开始重建: {len(origins)} 个网格原点, stride={cfg.stride}, "
        f"patch={spec.dimensionality.value} N={spec.size_px}"
    )

    predictions = np.zeros(len(origins), dtype=np.uint8)
    for start in range(0, len(origins), batch_size):
        chunk = centers[start:start + batch_size]
        tensors = np.stack(parallel_map(lambda c: extract_patch(volume, tuple(int(v) for v in c), spec), chunk))
        probs = np.asarray(model.predict_proba(tensors))
        if probs.shape != (len(chunk), NUM_CLASSES):
            raise InputValidationError(f"分类器输出形状 {probs.shape} 不是 ({len(chunk)}, {NUM_CLASSES})")
        predictions[start:start + len(chunk)] = probs.argmax(axis=1) + 1

    codes = np.zeros(volume.dims, dtype=np.uint8)
    membership = lung.membership
    for origin, pred in zip(origins, predictions):
        block = tuple(slice(int(g), int(g) + s) for g, s in zip(origin, cfg.stride))
        region = codes[block]
        region[membership[block]] = pred

    logger.info(f"重建完成: 写回 {int(np.count_nonzero(codes))} 个肺体素")
    return ClassificationMap(
        labels=LabelMask(codes, volume.spacing),
        origins=origins,
        predictions=predictions,
    )
