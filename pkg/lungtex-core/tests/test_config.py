"""
配置管理测试

INPUT:  lungtex.config 模块
OUTPUT: 验证配置管理功能的测试用例
POS:    确保配置系统正确性
"""

import pytest

from lungtex import LungTexConfig, get_config, reset_config, set_config
from lungtex.config import _ENV_FIELDS, _YAML_FIELDS, load_config


@pytest.mark.unit
class TestLungTexConfig:
    """测试 LungTexConfig 类"""

    def test_default_values(self):
        """测试默认配置值"""
        config = LungTexConfig()

        assert config.num_threads == 1
        assert config.torch_num_threads == 1
        assert config.hu_window_min == -1024.0
        assert config.hu_window_max == 600.0
        assert config.lung_hu_threshold == -320.0
        assert config.lung_min_component_voxels == 10000
        assert config.mlflow_enabled is False
        assert config.mlflow_tracking_uri == "file:./mlruns"

    def test_from_env_variables(self, monkeypatch):
        """测试从环境变量加载配置"""
        monkeypatch.setenv("LUNGTEX_NUM_THREADS", "4")
        monkeypatch.setenv("LUNGTEX_HU_WINDOW_MIN", "-1000")
        monkeypatch.setenv("MLFLOW_ENABLED", "true")
        monkeypatch.setenv("MLFLOW_TRACKING_URI", "http://env:5002")

        config = LungTexConfig.from_env()

        assert config.num_threads == 4
        assert config.hu_window_min == -1000.0
        assert config.mlflow_enabled is True
        assert config.mlflow_tracking_uri == "http://env:5002"

    def test_invalid_window(self):
        """HU 窗口上限必须大于下限"""
        with pytest.raises(ValueError, match="HU 窗口"):
            LungTexConfig(hu_window_min=100.0, hu_window_max=0.0)

    def test_invalid_threads(self):
        """线程数必须 >= 1"""
        with pytest.raises(ValueError):
            LungTexConfig(num_threads=0)


@pytest.mark.unit
class TestConfigManagement:
    """测试配置管理函数"""

    def test_set_and_get_config(self):
        """测试设置和获取配置"""
        set_config(LungTexConfig(num_threads=3))
        assert get_config().num_threads == 3

    def test_reset_config(self):
        """重置后恢复默认值"""
        set_config(LungTexConfig(num_threads=3))
        reset_config()
        assert get_config().num_threads == 1

    def test_load_config_from_yaml(self, tmp_path):
        """测试从 YAML 文件加载嵌套配置"""
        config_file = tmp_path / "lungtex.yaml"
        config_file.write_text(
            """
runtime:
  num_threads: 2
normalization:
  hu_min: -1000
  hu_max: 400
lung_mask:
  hu_threshold: -400
reconstruction:
  batch_size: 64
mlflow:
  enabled: true
  experiment_name: test-exp
""",
            encoding="utf-8",
        )

        config = load_config(config_file)

        assert config.num_threads == 2
        assert config.hu_window_min == -1000.0
        assert config.hu_window_max == 400.0
        assert config.lung_hu_threshold == -400.0
        assert config.inference_batch_size == 64
        assert config.mlflow_enabled is True
        assert config.mlflow_experiment_name == "test-exp"
        assert get_config() is config

    def test_env_overrides_file(self, tmp_path, monkeypatch):
        """环境变量优先于配置文件"""
        config_file = tmp_path / "lungtex.yaml"
        config_file.write_text("runtime:\n  num_threads: 2\n", encoding="utf-8")
        monkeypatch.setenv("LUNGTEX_NUM_THREADS", "6")

        assert LungTexConfig.load(config_file).num_threads == 6

    def test_missing_file_uses_defaults(self, tmp_path):
        """配置文件不存在时使用默认值"""
        config = LungTexConfig.load(tmp_path / "absent.yaml")
        assert config.to_dict() == LungTexConfig().to_dict()

    def test_env_equal_to_default_still_overrides_file(self, tmp_path, monkeypatch):
        """已设置的环境变量即使等于默认值也覆盖配置文件"""
        config_file = tmp_path / "lungtex.yaml"
        config_file.write_text("runtime:\n  num_threads: 3\n", encoding="utf-8")
        monkeypatch.setenv("LUNGTEX_NUM_THREADS", "1")

        assert LungTexConfig.load(config_file).num_threads == 1

    def test_unknown_section_ignored(self, tmp_path, caplog):
        """未识别的分节记录警告，其余分节照常读取"""
        config_file = tmp_path / "lungtex.yaml"
        config_file.write_text("runtime:\n  num_threads: 2\nserving:\n  port: 8000\n", encoding="utf-8")

        with caplog.at_level("WARNING", logger="lungtex.config"):
            config = LungTexConfig.from_file(config_file)

        assert config.num_threads == 2
        assert "serving" in caplog.text

    def test_invalid_yaml_falls_back_to_defaults(self, tmp_path):
        """YAML 语法错误时回退到默认值"""
        config_file = tmp_path / "lungtex.yaml"
        config_file.write_text("runtime: [unclosed\n", encoding="utf-8")

        assert LungTexConfig.from_file(config_file).to_dict() == LungTexConfig().to_dict()

    def test_with_overrides_revalidates(self):
        """with_overrides 返回新实例并重新校验"""
        base = LungTexConfig()
        changed = base.with_overrides(num_threads=4)

        assert changed.num_threads == 4
        assert base.num_threads == 1
        with pytest.raises(ValueError, match="HU 窗口"):
            base.with_overrides(hu_window_max=-2000.0)

    def test_every_field_reachable_from_env_and_yaml(self):
        """每个配置字段都有对应的环境变量与 YAML 键，且没有多余映射"""
        fields = set(LungTexConfig().to_dict())

        assert set(_ENV_FIELDS) == fields
        assert set(_YAML_FIELDS.values()) == fields

    def test_removed_mlflow_key_is_ignored(self, tmp_path):
        """mlflow 分节中未映射的键不产生字段"""
        config_file = tmp_path / "lungtex.yaml"
        config_file.write_text("mlflow:\n  enabled: true\n  ui_base_url: http://x\n", encoding="utf-8")

        config = LungTexConfig.from_file(config_file)

        assert config.mlflow_enabled is True
        assert "mlflow_ui_base_url" not in config.to_dict()
