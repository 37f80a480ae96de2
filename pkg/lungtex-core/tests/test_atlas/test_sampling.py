"""
图谱与平衡采样测试

INPUT:  lungtex.atlas.atlas, lungtex.atlas.sampling 模块
OUTPUT: 验证候选枚举、类别平衡、填充率、排除椭球与可复现性的测试用例
POS:    确保训练 patch 的采样不变式成立
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lungtex import LungTexConfig, set_config
from lungtex.atlas import PatchSpec, build_atlas, feasible_centers, sample_patches, verify_patchset
from lungtex.errors import GridMismatchError, InfeasibleSamplingError, InputValidationError
from lungtex.volume import LabelMask, TextureLabel, Volume


@pytest.mark.unit
class TestBuildAtlas:
    """测试图谱构建"""

    def test_candidates_per_class(self, slab_atlas):
        """每类候选为该分区全部体素，x 最快顺序"""
        entry = slab_atlas.entry("scan_a")
        for label in TextureLabel:
            assert entry.candidate_count(label) == 8 * 16 * 6
        normal = entry.candidates[TextureLabel.NORMAL]
        assert normal[0].tolist() == [0, 0, 0]
        assert normal[1].tolist() == [1, 0, 0]
        assert slab_atlas.candidate_count(TextureLabel.GG) == 2 * 768
        assert slab_atlas.scans_with_class(TextureLabel.EMPHYSEMA) == 2

    def test_duplicate_scan_id(self, slab_factory):
        """scan_id 重复时拒绝"""
        volume, labels = slab_factory()
        with pytest.raises(InputValidationError, match="重复"):
            build_atlas([("s", volume, labels), ("s", volume, labels)])

    def test_grid_mismatch(self, slab_factory):
        """标签掩膜与体数据网格不一致"""
        volume, _ = slab_factory()
        labels = LabelMask(codes=np.ones((40, 16, 6)), spacing=(1.0, 1.0, 2.0))
        with pytest.raises(GridMismatchError):
            build_atlas([("s", volume, labels)])

    def test_subset_keeps_order(self, slab_atlas):
        """子图谱保持原扫描顺序"""
        assert slab_atlas.subset(["scan_b", "scan_a"]).scan_ids == ["scan_a", "scan_b"]
        with pytest.raises(InputValidationError):
            slab_atlas.subset(["scan_z"])


@pytest.mark.unit
class TestSamplePatches:
    """测试平衡、去相关采样"""

    def test_balanced_and_verified(self, slab_atlas, small_spec):
        """每类数量相等且全部不变式通过复核"""
        patchset = sample_patches(slab_atlas, small_spec)

        assert len(patchset) == 25
        assert patchset.is_balanced()
        assert patchset.tensors.shape == (25, 4, 4)
        assert verify_patchset(slab_atlas, patchset) == []

    def test_centers_carry_their_label(self, slab_atlas, small_spec):
        """patch 中心体素的标注即为 patch 标签，填充率 1.0 时整块为同一 HU"""
        patchset = sample_patches(slab_atlas, small_spec)
        for record in patchset.records:
            assert slab_atlas.entry(record.scan_id).labels.codes[record.origin] == int(record.label)
            assert record.fill == 1.0
            assert np.unique(record.tensor).size == 1

    def test_reproducible(self, slab_atlas, small_spec):
        """相同种子得到相同结果，与线程数无关"""
        first = sample_patches(slab_atlas, small_spec)
        set_config(LungTexConfig(num_threads=4))
        second = sample_patches(slab_atlas, small_spec)

        np.testing.assert_array_equal(first.origins, second.origins)
        assert first.scan_ids == second.scan_ids

    def test_large_radius_limits_each_scan(self, slab_atlas, small_spec):
        """排除半径覆盖整个分区时每扫描每类只接受一个中心"""
        from dataclasses import replace

        patchset = sample_patches(slab_atlas, replace(small_spec, selection_radius_mm=100.0))
        assert len(patchset) == 10
        for label in TextureLabel:
            scans = [r.scan_id for r in patchset.records if r.label == label]
            assert sorted(scans) == ["scan_a", "scan_b"]

    def test_missing_class_is_infeasible(self, slab_factory, small_spec):
        """图谱缺少某类时报错"""
        volume, labels = slab_factory(labels=tuple(TextureLabel)[:4])
        atlas = build_atlas([("s", volume, labels)])
        with pytest.raises(InfeasibleSamplingError, match="EMPHYSEMA"):
            sample_patches(atlas, small_spec)

    def test_fill_requirement_can_exclude_class(self, slab_factory):
        """分区窄于 patch 时，填充率 1.0 没有可行中心"""
        volume, labels = slab_factory(dims=(15, 16, 6))
        atlas = build_atlas([("s", volume, labels)])
        spec = PatchSpec(size_px=4, dimensionality="2D", min_fill_factor=1.0, selection_radius_mm=1.0)

        centers, _ = feasible_centers(atlas.entries[0], TextureLabel.NORMAL, spec)
        assert len(centers) == 0
        with pytest.raises(InfeasibleSamplingError):
            sample_patches(atlas, spec)

    @settings(max_examples=10, deadline=None)
    @given(
        seed=st.integers(0, 1000),
        radius=st.sampled_from([1.0, 2.0, 3.5]),
        fill=st.sampled_from([0.5, 0.75, 1.0]),
        per_class=st.integers(1, 12),
    )
    def test_invariants_hold_for_random_specs(self, seed, radius, fill, per_class):
        """随机规格下填充率、排除椭球与平衡始终成立"""
        rng = np.random.default_rng(seed)
        codes = np.repeat(np.arange(1, 6), 6)[:, None, None] * np.ones((1, 12, 4), dtype=np.int64)
        noise = rng.random(codes.shape) < 0.1
        codes = np.where(noise, rng.integers(1, 6, size=codes.shape), codes)
        atlas = build_atlas([("r", Volume(data=np.zeros(codes.shape), spacing=(1, 1, 1)),
                              LabelMask(codes=codes, spacing=(1, 1, 1)))])
        spec = PatchSpec(size_px=4, dimensionality="2D", selection_radius_mm=radius,
                         min_fill_factor=fill, patches_per_class=per_class, rng_seed=seed)
        try:
            patchset = sample_patches(atlas, spec)
        except InfeasibleSamplingError:
            return
        assert verify_patchset(atlas, patchset) == []
        assert len(patchset) <= 5 * per_class
