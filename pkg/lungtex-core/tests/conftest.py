"""
Pytest 配置和共享 fixtures

INPUT:  pytest, lungtex
OUTPUT: 测试标记、合成扫描构造函数与共享 fixtures
POS:    测试基础设施
"""

from typing import Sequence, Tuple

import numpy as np
import pytest

from lungtex.atlas import Atlas, PatchSpec, build_atlas
from lungtex.volume import LabelMask, LungMask, TextureLabel, Volume

# 各纹理的合成 HU 基准值（与体模默认值同序：EMPHYSEMA < NORMAL < GG）
TEXTURE_HU = {
    TextureLabel.NORMAL: -850,
    TextureLabel.GG: -650,
    TextureLabel.GGR: -500,
    TextureLabel.HONEYCOMBING: -300,
    TextureLabel.EMPHYSEMA: -950,
}


# 配置 pytest 标记
def pytest_configure(config):
    """配置 pytest 标记"""
    config.addinivalue_line("markers", "unit: 单元测试")
    config.addinivalue_line("markers", "integration: 集成测试")
    config.addinivalue_line("markers", "e2e: 端到端测试")
    config.addinivalue_line("markers", "requires_mlflow: 需要 MLflow 服务")
    config.addinivalue_line("markers", "slow: 慢速测试")


@pytest.fixture(autouse=True)
def reset_config():
    """每个测试前后重置配置"""
    from lungtex import reset_config
    reset_config()
    yield
    reset_config()


def make_slab_scan(
    dims: Tuple[int, int, int] = (40, 16, 6),
    spacing: Tuple[float, float, float] = (1.0, 1.0, 1.0),
    labels: Sequence[TextureLabel] = tuple(TextureLabel),
) -> Tuple[Volume, LabelMask]:
    """
    沿 x 轴等宽切成板状分区的合成扫描：第 i 块标为 labels[i]，
    HU 为该纹理的基准值，整个体数据都已标注。
    """
    nx, ny, nz = dims
    width = nx // len(labels)
    codes = np.zeros(dims, dtype=np.uint8)
    hu = np.full(dims, -1000, dtype=np.int16)
    for i, label in enumerate(labels):
        stop = nx if i == len(labels) - 1 else (i + 1) * width
        codes[i * width:stop] = int(label)
        hu[i * width:stop] = TEXTURE_HU[label]
    return Volume(data=hu, spacing=spacing), LabelMask(codes=codes, spacing=spacing)


@pytest.fixture
def slab_scan():
    """40×16×6 的五类板状扫描"""
    return make_slab_scan()


@pytest.fixture
def slab_atlas() -> Atlas:
    """两个五类板状扫描组成的图谱"""
    scans = []
    for scan_id in ("scan_a", "scan_b"):
        volume, labels = make_slab_scan()
        scans.append((scan_id, volume, labels))
    return build_atlas(scans)


@pytest.fixture
def small_spec() -> PatchSpec:
    """4 像素 2D patch，半径 2 mm，填充率 1.0"""
    return PatchSpec(size_px=4, dimensionality="2D", selection_radius_mm=2.0, min_fill_factor=1.0,
                     patches_per_class=5, rng_seed=7)


@pytest.fixture
def full_lung():
    """与 slab_scan 同网格、全部为肺的掩膜"""
    return LungMask(membership=np.ones((40, 16, 6), dtype=bool), spacing=(1.0, 1.0, 1.0))


@pytest.fixture
def slab_factory():
    """make_slab_scan 构造函数"""
    return make_slab_scan
