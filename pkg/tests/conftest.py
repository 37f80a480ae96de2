"""
Pytest 配置和共享 fixtures

INPUT:  pytest, lungtex, lungquant
OUTPUT: 测试标记、配置隔离与运行配置文件构造 fixtures
POS:    lungquant 应用测试基础设施
"""

import json
import os

import pytest


def pytest_configure(config):
    """配置 pytest 标记"""
    config.addinivalue_line("markers", "unit: 单元测试")
    config.addinivalue_line("markers", "integration: 集成测试")
    config.addinivalue_line("markers", "e2e: 端到端测试")
    config.addinivalue_line("markers", "slow: 慢速测试")


@pytest.fixture(autouse=True)
def isolated_env(tmp_path, monkeypatch):
    """
    每个测试在空的临时目录中运行：清除 LUNGQUANT_* / LUNGTEX_* / MLFLOW_* 环境变量，
    重置 lungtex 全局配置与 CLI 配置单例。
    """
    from lungtex import reset_config
    from lungquant.settings import reset_cli_settings

    for name in list(os.environ):
        if name.startswith(("LUNGQUANT_", "LUNGTEX_", "MLFLOW_")):
            monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
    reset_config()
    reset_cli_settings()
    yield
    reset_config()
    reset_cli_settings()


@pytest.fixture
def write_run_config(tmp_path):
    """把 dict 写成运行配置 JSON 并返回路径"""

    def _write(data: dict, name: str = "run.json") -> str:
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)

    return _write
