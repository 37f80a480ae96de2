"""
MLflow 集成模块

INPUT:  无
OUTPUT: MLflow 相关的所有公共函数
POS:    MLflow 功能模块入口
"""

from lungtex.mlflow.tracking import (
    MLFLOW_INSTALLED,
    compute_patchset_hash,
    init_mlflow,
    log_artifact_files,
    log_dataset_metadata,
    log_epoch_metrics,
    log_evaluation_table,
    log_run_metrics,
    track_run,
)

__all__ = [
    "MLFLOW_INSTALLED",
    # 初始化
    "init_mlflow",
    # Run
    "track_run",
    "log_epoch_metrics",
    "log_run_metrics",
    "log_artifact_files",
    # 数据与评估
    "compute_patchset_hash",
    "log_dataset_metadata",
    "log_evaluation_table",
]
