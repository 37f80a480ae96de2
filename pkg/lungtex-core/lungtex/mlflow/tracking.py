"""
MLflow 追踪模块

INPUT:  config.py 中的 MLflow 配置, 训练/搜索/评估参数
OUTPUT: init_mlflow(), track_run(), log_epoch_metrics(), log_run_metrics(), log_artifact_files(),
        compute_patchset_hash(), log_dataset_metadata(), log_evaluation_table() 函数
POS:    MLflow 集成的核心模块，被 classifier.training / classifier.hypersearch 与 CLI 调用

MLflow 默认禁用；禁用或未安装时所有函数都是空操作，追踪失败只记录警告，不影响运行。
init_mlflow 失败时会关闭本进程的追踪开关，之后的 Run 不再尝试连接。

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import hashlib
import json
import logging
import os
from contextlib import contextmanager
from typing import Any, Dict, Generator, Iterable, List, Mapping, Optional

import pandas as pd

from lungtex.config import get_config, set_config

try:
    import mlflow
    MLFLOW_INSTALLED = True
except ImportError:
    mlflow = None
    MLFLOW_INSTALLED = False

logger = logging.getLogger(__name__)

# MLflow 参数值长度上限
PARAM_MAX_CHARS = 500


def _tracking_enabled() -> bool:
    return get_config().mlflow_enabled and MLFLOW_INSTALLED


def _param_value(value: Any) -> str:
    """参数值转为字符串：None 记为空串，超长时截断并以 "..." 结尾"""
    text = "" if value is None else str(value)
    if len(text) <= PARAM_MAX_CHARS:
        return text
    return text[:PARAM_MAX_CHARS - 3] + "..."


def _store_reachable(uri: str, timeout: float = 1.0) -> bool:
    """本地存储 (file / sqlite / 路径) 直接视为可达；HTTP 地址发一次短超时 GET"""
    if not uri.startswith(("http://", "https://")):
        return True
    try:
        import requests
    except ImportError:
        logger.warning("requests 未安装，无法检查追踪服务器")
        return False
    try:
        return requests.get(uri, timeout=timeout).status_code < 500
    except requests.RequestException as e:
        logger.debug(f"追踪服务器连接失败: {e}")
        return False


def _disable_tracking(reason: str) -> bool:
    logger.warning(f"{reason}，本次运行不追踪")
    set_config(get_config().with_overrides(mlflow_enabled=False))
    return False


def init_mlflow() -> bool:
    """
    按全局配置设置 tracking URI 与 experiment，CLI 启动时调用一次。

    Returns:
        追踪是否可用；不可用时全局配置的 mlflow_enabled 被置为 False
    """
    config = get_config()
    if not config.mlflow_enabled:
        logger.debug("MLflow 追踪未启用")
        return False
    if not MLFLOW_INSTALLED:
        return _disable_tracking("MLFLOW_ENABLED=true 但 mlflow 未安装")

    uri = config.mlflow_tracking_uri
    if not _store_reachable(uri):
        return _disable_tracking(f"无法连接追踪服务器 {uri}")
    try:
        mlflow.set_tracking_uri(uri)
        mlflow.set_experiment(config.mlflow_experiment_name)
    except Exception as e:
        return _disable_tracking(f"MLflow 初始化失败: {e}")

    logger.info(f"MLflow 追踪: {uri}, experiment={config.mlflow_experiment_name}")
    return True


@contextmanager
def track_run(
    run_name: str,
    params: Mapping[str, Any],
    tags: Optional[Dict[str, str]] = None,
    nested: bool = False,
) -> Generator[Optional[Any], None, None]:
    """
    在一个 MLflow Run 中执行代码块，进入时记录参数与标签。

    追踪关闭或 Run 启动失败时 yield None，调用方照常执行。

    Args:
        run_name: 如 "train_2.5D_64" 或 "hypersearch_point_003"
        params: 参数字典，值转为字符串并截断到 PARAM_MAX_CHARS
        tags: 可选标签
        nested: 是否作为当前 Run 的子 Run
    """
    if not _tracking_enabled():
        yield None
        return

    try:
        run_cm = mlflow.start_run(run_name=run_name, nested=nested)
        run = run_cm.__enter__()
    except Exception as e:
        logger.warning(f"MLflow Run 启动失败，本次不追踪: {e}")
        yield None
        return

    try:
        if tags:
            mlflow.set_tags(tags)
        if params:
            try:
                mlflow.log_params({key: _param_value(value) for key, value in params.items()})
            except Exception as e:
                logger.warning(f"记录参数失败: {e}")
        yield run
    except BaseException as exc:
        run_cm.__exit__(type(exc), exc, exc.__traceback__)
        raise
    else:
        run_cm.__exit__(None, None, None)


def _active_run() -> bool:
    if not _tracking_enabled():
        return False
    try:
        if not mlflow.active_run():
            logger.debug("没有活跃的 MLflow Run，跳过记录")
            return False
        return True
    except Exception as e:
        logger.warning(f"查询 MLflow Run 失败: {e}")
        return False


def log_epoch_metrics(epoch: int, metrics: Mapping[str, float]) -> None:
    """
    记录单个 epoch 的训练指标（以 epoch 为 step）。

    Args:
        epoch: 从 1 开始的 epoch 序号
        metrics: 如 {"train_loss": ..., "train_acc": ..., "val_acc": ...}
    """
    if not get_config().mlflow_log_epochs or not _active_run():
        return
    try:
        mlflow.log_metrics({k: float(v) for k, v in metrics.items()}, step=epoch)
    except Exception as e:
        logger.warning(f"记录 epoch {epoch} 指标失败: {e}")


def log_run_metrics(metrics: Mapping[str, float]) -> None:
    """记录汇总指标到当前活跃 Run"""
    if not _active_run():
        return
    try:
        mlflow.log_metrics({k: float(v) for k, v in metrics.items()})
        logger.info(f"已记录运行指标: {sorted(metrics)}")
    except Exception as e:
        logger.warning(f"记录运行指标失败: {e}")


def log_artifact_files(paths: Iterable[str], artifact_path: Optional[str] = None) -> None:
    """
    记录产出文件到当前活跃 Run，缺失文件只记录警告。

    Args:
        paths: 文件路径列表
        artifact_path: Run 内的目标子目录
    """
    if not _active_run():
        return
    for path in paths:
        path = str(path)
        if not os.path.exists(path):
            logger.warning(f"工件文件不存在: {path}")
            continue
        try:
            mlflow.log_artifact(path, artifact_path=artifact_path)
            logger.info(f"已记录工件: {path}")
        except Exception as e:
            logger.warning(f"记录工件失败 ({path}): {e}")


def compute_patchset_hash(patchset: Any) -> str:
    """
    计算 PatchSet 的 SHA-256 哈希，用于数据版本追踪。

    哈希覆盖张量字节、标签、原点与来源扫描 ID，内容相同的 PatchSet 哈希相同。

    Args:
        patchset: lungtex.atlas.PatchSet

    Returns:
        64 位十六进制字符串；计算失败返回空字符串
    """
    try:
        h = hashlib.sha256()
        h.update(patchset.tensors.astype("<f4", copy=False).tobytes())
        h.update(patchset.labels.astype("u1", copy=False).tobytes())
        h.update(patchset.origins.astype("<i8", copy=False).tobytes())
        h.update("\0".join(patchset.scan_ids).encode("utf-8"))
        return h.hexdigest()
    except Exception as e:
        logger.warning(f"计算 PatchSet 哈希失败: {e}")
        return ""


def log_dataset_metadata(patchset: Any, dataset_name: str = "train") -> None:
    """
    记录 PatchSet 元数据（数量、类别计数、扫描数、哈希）到当前活跃 Run。

    Args:
        patchset: lungtex.atlas.PatchSet
        dataset_name: 参数前缀，如 "train" / "validation"
    """
    if not _active_run():
        return
    try:
        counts = {label.column: n for label, n in patchset.class_counts().items()}
        mlflow.log_params({
            f"{dataset_name}_patches": len(patchset),
            f"{dataset_name}_scans": len(patchset.scan_set),
            f"{dataset_name}_class_counts": _param_value(json.dumps(counts)),
            f"{dataset_name}_hash": compute_patchset_hash(patchset),
        })
        logger.info(f"已记录数据集元数据: {dataset_name} ({len(patchset)} patches)")
    except Exception as e:
        logger.warning(f"记录数据集元数据失败: {e}")


def log_evaluation_table(rows: List[Dict[str, Any]], artifact_name: str = "evaluation_auc.json") -> None:
    """
    使用 mlflow.log_table() 记录逐类 AUC 表，并把每行的 AUC 记为指标。

    Args:
        rows: 每行形如 {"split": "test", "class": "normal", "auc": 0.97, ...}
        artifact_name: 工件文件名
    """
    if not rows:
        logger.warning("评估结果为空，跳过记录")
        return
    if not _active_run():
        return
    try:
        frame = pd.DataFrame(rows)
        mlflow.log_table(data=frame, artifact_file=artifact_name)
        metrics = {
            f"auc_{row['split']}_{row['class']}": float(row["auc"])
            for row in rows
            if row.get("auc") is not None
        }
        if metrics:
            mlflow.log_metrics(metrics)
        logger.info(f"已记录 {len(rows)} 行评估结果到 {artifact_name}")
    except Exception as e:
        logger.warning(f"记录评估结果失败: {e}")
