"""
lungtex-core 配置管理

INPUT:  环境变量 (LUNGTEX_*, MLFLOW_*), 配置文件 (YAML)
OUTPUT: LungTexConfig 类, get_config(), set_config(), load_config(), reset_config() 函数
POS:    配置管理模块，被所有其他模块依赖

支持三种配置方式（优先级从高到低）：
1. 环境变量（只有已设置的变量才覆盖）
2. 配置文件（YAML，按 runtime / normalization / lung_mask / reconstruction / mlflow 分节）
3. 默认值

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import os
import logging
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple
from dataclasses import dataclass, asdict, replace

logger = logging.getLogger(__name__)


def _parse_bool(raw: Any) -> bool:
    if isinstance(raw, bool):
        return raw
    return str(raw).strip().lower() == "true"


# 字段 -> (环境变量, 类型转换)
_ENV_FIELDS: Dict[str, Tuple[str, Callable[[Any], Any]]] = {
    "num_threads": ("LUNGTEX_NUM_THREADS", int),
    "torch_num_threads": ("LUNGTEX_TORCH_NUM_THREADS", int),
    "hu_window_min": ("LUNGTEX_HU_WINDOW_MIN", float),
    "hu_window_max": ("LUNGTEX_HU_WINDOW_MAX", float),
    "lung_hu_threshold": ("LUNGTEX_LUNG_HU_THRESHOLD", float),
    "lung_min_component_voxels": ("LUNGTEX_LUNG_MIN_COMPONENT_VOXELS", int),
    "inference_batch_size": ("LUNGTEX_INFERENCE_BATCH_SIZE", int),
    "mlflow_enabled": ("MLFLOW_ENABLED", _parse_bool),
    "mlflow_tracking_uri": ("MLFLOW_TRACKING_URI", str),
    "mlflow_experiment_name": ("MLFLOW_EXPERIMENT_NAME", str),
    "mlflow_log_epochs": ("MLFLOW_LOG_EPOCHS", _parse_bool),
}

# YAML (分节, 键) -> 字段
_YAML_FIELDS: Dict[Tuple[str, str], str] = {
    ("runtime", "num_threads"): "num_threads",
    ("runtime", "torch_num_threads"): "torch_num_threads",
    ("normalization", "hu_min"): "hu_window_min",
    ("normalization", "hu_max"): "hu_window_max",
    ("lung_mask", "hu_threshold"): "lung_hu_threshold",
    ("lung_mask", "min_component_voxels"): "lung_min_component_voxels",
    ("reconstruction", "batch_size"): "inference_batch_size",
    ("mlflow", "enabled"): "mlflow_enabled",
    ("mlflow", "tracking_uri"): "mlflow_tracking_uri",
    ("mlflow", "experiment_name"): "mlflow_experiment_name",
    ("mlflow", "log_epochs"): "mlflow_log_epochs",
}


@dataclass
class LungTexConfig:
    """lungtex 运行时配置"""

    # ============ 运行时 ============
    # 工作线程池大小：扫描级 / 网格原点级并行
    num_threads: int = 1
    # 网络内部算子线程数，固定后训练权重与 num_threads 无关
    torch_num_threads: int = 1

    # ============ 强度归一化窗口 (HU) ============
    hu_window_min: float = -1024.0
    hu_window_max: float = 600.0

    # ============ 阈值肺掩膜（后备方案） ============
    lung_hu_threshold: float = -320.0
    lung_min_component_voxels: int = 10000

    # ============ 重建 ============
    inference_batch_size: int = 256

    # ============ MLflow 配置 ============
    mlflow_enabled: bool = False
    mlflow_tracking_uri: str = "file:./mlruns"
    mlflow_experiment_name: str = "lungtex-experiments"
    mlflow_log_epochs: bool = True

    def __post_init__(self):
        if self.num_threads < 1:
            raise ValueError(f"num_threads 必须 >= 1，当前为 {self.num_threads}")
        if self.torch_num_threads < 1:
            raise ValueError(f"torch_num_threads 必须 >= 1，当前为 {self.torch_num_threads}")
        if self.inference_batch_size < 1:
            raise ValueError(f"inference_batch_size 必须 >= 1，当前为 {self.inference_batch_size}")
        if self.hu_window_max <= self.hu_window_min:
            raise ValueError(
                f"HU 窗口无效: ({self.hu_window_min}, {self.hu_window_max})"
            )

    @staticmethod
    def _env_overrides() -> Dict[str, Any]:
        """已设置的环境变量 -> 字段值"""
        overrides = {}
        for name, (env_var, cast) in _ENV_FIELDS.items():
            raw = os.getenv(env_var)
            if raw is not None:
                overrides[name] = cast(raw)
        return overrides

    @staticmethod
    def _file_values(config_path: Path) -> Dict[str, Any]:
        """读取 YAML 并按分节映射为字段值；读取失败时返回空字典"""
        try:
            import yaml
        except ImportError:
            logger.warning("PyYAML 未安装，忽略配置文件")
            return {}
        try:
            data = yaml.safe_load(config_path.read_text(encoding="utf-8")) or {}
        except (OSError, yaml.YAMLError) as e:
            logger.warning(f"配置文件读取失败 {config_path}: {e}")
            return {}

        values = {}
        for (section, key), name in _YAML_FIELDS.items():
            block = data.get(section) or {}
            if key in block:
                _, cast = _ENV_FIELDS[name]
                values[name] = cast(block[key])
        unknown = sorted(set(data) - {section for section, _ in _YAML_FIELDS})
        if unknown:
            logger.warning(f"配置文件中存在未识别的分节，已忽略: {unknown}")
        return values

    @classmethod
    def from_env(cls) -> "LungTexConfig":
        """默认值 + 环境变量"""
        return cls(**cls._env_overrides())

    @classmethod
    def from_file(cls, config_path: Path) -> "LungTexConfig":
        """默认值 + YAML 配置文件"""
        return cls(**cls._file_values(Path(config_path)))

    @classmethod
    def load(cls, config_path: Optional[Path] = None) -> "LungTexConfig":
        """
        按 环境变量 > 配置文件 > 默认值 合并配置。

        Args:
            config_path: YAML 配置文件路径；为空或不存在时跳过
        """
        values: Dict[str, Any] = {}
        if config_path is not None:
            config_path = Path(config_path)
            if config_path.exists():
                values.update(cls._file_values(config_path))
                logger.info(f"已从配置文件加载: {config_path}")
            else:
                logger.warning(f"配置文件不存在，使用默认值: {config_path}")
        values.update(cls._env_overrides())
        return cls(**values)

    def with_overrides(self, **changes: Any) -> "LungTexConfig":
        """返回替换部分字段后的新配置（重新校验）"""
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


# 全局配置实例
_config: Optional[LungTexConfig] = None


def get_config() -> LungTexConfig:
    """获取全局配置；首次调用时按 load() 的优先级创建"""
    global _config
    if _config is None:
        _config = LungTexConfig.load()
    return _config


def set_config(config: LungTexConfig):
    global _config
    _config = config


def load_config(config_path: Path) -> LungTexConfig:
    """从文件加载配置并设为全局配置"""
    config = LungTexConfig.load(config_path)
    set_config(config)
    return config


def reset_config():
    """清空全局配置，下次 get_config() 重新加载"""
    global _config
    _config = None
