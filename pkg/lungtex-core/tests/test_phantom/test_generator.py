"""
纹理体模生成器测试

INPUT:  lungtex.phantom 模块
OUTPUT: 验证精确计数、分区连续性、密度排序、可复现性与肺掩膜一致性的测试用例
POS:    确保桌面规模实验的真值可靠
"""

import numpy as np
import pytest

from lungtex.errors import InputValidationError
from lungtex.phantom import PhantomSpec, generate_cohort, generate_phantom
from lungtex.volume import TextureLabel, threshold_lung_mask


def _spec(**overrides) -> PhantomSpec:
    params = dict(
        dims=(24, 24, 24),
        compartments=((TextureLabel.GG, 0.3), (TextureLabel.EMPHYSEMA, 0.3)),
        rng_seed=13,
    )
    params.update(overrides)
    return PhantomSpec(**params)


@pytest.fixture(scope="module")
def phantom():
    """24³ 的 GG / EMPHYSEMA / NORMAL 三分区体模"""
    return generate_phantom(_spec(), scan_id="p0")


@pytest.mark.unit
class TestPhantomSpec:
    """测试体模规格校验"""

    def test_compartments_over_one(self):
        """分区比例之和超过 1"""
        with pytest.raises(InputValidationError, match="超过 1"):
            _spec(compartments=((TextureLabel.GG, 0.6), (TextureLabel.GGR, 0.5)))

    def test_negative_fraction(self):
        """分区比例为负"""
        with pytest.raises(InputValidationError):
            _spec(compartments=((TextureLabel.GG, -0.1),))

    def test_lung_outside_body(self):
        """肺椭球大于体部椭球"""
        with pytest.raises(InputValidationError):
            _spec(lung_semi_axes=(0.5, 0.5, 0.5), body_semi_axes=(0.45, 0.45, 0.45))


@pytest.mark.unit
class TestGeneratePhantom:
    """测试体模生成"""

    def test_exact_census(self, phantom):
        """各分区体素数为 round(比例 × 肺体素数)，剩余为 NORMAL"""
        n_lung = phantom.lung.voxel_count
        expected = int(round(0.3 * n_lung))
        assert phantom.census[TextureLabel.GG] == expected
        assert phantom.census[TextureLabel.EMPHYSEMA] == expected
        assert phantom.census[TextureLabel.NORMAL] == n_lung - 2 * expected
        assert phantom.census[TextureLabel.GGR] == 0
        assert phantom.lung_voxels == n_lung

    def test_labels_cover_exactly_the_lung(self, phantom):
        """非零标签恰为肺体素"""
        np.testing.assert_array_equal(phantom.labels.codes != 0, phantom.lung.membership)

    def test_compartments_are_contiguous(self, phantom):
        """分区按 (x, y, z) 字典序连续排列"""
        flat = phantom.labels.codes.ravel(order="C")
        gg = np.flatnonzero(flat == int(TextureLabel.GG))
        emph = np.flatnonzero(flat == int(TextureLabel.EMPHYSEMA))
        normal = np.flatnonzero(flat == int(TextureLabel.NORMAL))
        assert gg.max() < emph.min()
        assert emph.max() < normal.min()

    def test_density_ordering(self, phantom):
        """HU 中位数满足 EMPHYSEMA < NORMAL < GG"""
        data, codes = phantom.volume.data, phantom.labels.codes
        medians = {label: np.median(data[codes == int(label)]) for label in
                   (TextureLabel.NORMAL, TextureLabel.GG, TextureLabel.EMPHYSEMA)}
        assert medians[TextureLabel.EMPHYSEMA] < medians[TextureLabel.NORMAL] < medians[TextureLabel.GG]

    def test_reproducible_per_scan(self, phantom):
        """相同种子与 scan_id 得到逐体素相同的结果，换 scan_id 则不同"""
        again = generate_phantom(_spec(), scan_id="p0")
        other = generate_phantom(_spec(), scan_id="p1")
        np.testing.assert_array_equal(again.volume.data, phantom.volume.data)
        np.testing.assert_array_equal(other.labels.codes, phantom.labels.codes)
        assert not np.array_equal(other.volume.data, phantom.volume.data)

    def test_threshold_mask_recovers_lung(self, phantom):
        """没有高密度结构时阈值肺掩膜与真值一致"""
        mask = threshold_lung_mask(phantom.volume, min_component_voxels=100)
        np.testing.assert_array_equal(mask.membership, phantom.lung.membership)

    def test_census_dict(self, phantom):
        """census JSON 使用纹理名作键"""
        census = phantom.census_dict()
        assert census["dims"] == [24, 24, 24]
        assert set(census["counts"]) == {label.name for label in TextureLabel}
        assert sum(census["fractions"].values()) == pytest.approx(1.0)


@pytest.mark.unit
class TestGenerateCohort:
    """测试批量生成"""

    def test_order_preserved(self):
        """输出顺序与输入一致"""
        spec = _spec(dims=(16, 16, 16))
        cohort = generate_cohort([("b", spec), ("a", spec)])
        assert [scan_id for scan_id, _ in cohort] == ["b", "a"]

    def test_duplicate_ids(self):
        """scan_id 重复"""
        spec = _spec(dims=(16, 16, 16))
        with pytest.raises(InputValidationError, match="重复"):
            generate_cohort([("a", spec), ("a", spec)])
