"""
lungquant CLI 进程配置

INPUT:  环境变量 (LUNGQUANT_LOG_LEVEL, LUNGQUANT_THREADS, LUNGQUANT_CORE_CONFIG, LUNGQUANT_OUT_DIR), .env 文件
OUTPUT: CLISettings, get_cli_settings(), reset_cli_settings(), DEFAULT_OUT_DIR 常量
POS:    CLI 进程级配置，与运行配置 (schemas.RunConfig) 分离：这里只放与结果无关的运行环境

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import logging
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings

DEFAULT_OUT_DIR = "out"

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


class CLISettings(BaseSettings):
    """
    CLI 运行环境配置

    环境变量名为 LUNGQUANT_ + 字段名（大写），命令行参数优先于环境变量。
    """

    log_level: str = Field(default="INFO", description="日志级别")
    threads: Optional[int] = Field(default=None, description="工作线程数，覆盖 lungtex-core 的 num_threads")
    core_config: Optional[str] = Field(default=None, description="lungtex-core YAML 配置文件路径")
    out_dir: str = Field(default=DEFAULT_OUT_DIR, description="默认输出目录")

    model_config = {
        "env_prefix": "LUNGQUANT_",
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "extra": "ignore",
    }

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """验证日志级别"""
        level = v.upper()
        if level not in _LOG_LEVELS:
            logging.warning(f"Invalid LUNGQUANT_LOG_LEVEL {v}, using default INFO")
            return "INFO"
        return level

    @field_validator("threads")
    @classmethod
    def validate_threads(cls, v: Optional[int]) -> Optional[int]:
        """验证线程数"""
        if v is not None and v < 1:
            logging.warning(f"Invalid LUNGQUANT_THREADS {v}, ignored")
            return None
        return v


# 缓存的 CLISettings 实例
_cli_settings: Optional[CLISettings] = None


def get_cli_settings() -> CLISettings:
    """
    获取 CLI 配置实例（单例模式）

    Returns:
        CLISettings: CLI 配置实例
    """
    global _cli_settings
    if _cli_settings is None:
        _cli_settings = CLISettings()
    return _cli_settings


def reset_cli_settings() -> None:
    """重置 CLI 配置（主要用于测试）"""
    global _cli_settings
    _cli_settings = None
