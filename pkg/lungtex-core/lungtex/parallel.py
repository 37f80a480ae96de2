"""
有序并行映射

INPUT:  可调用对象, 任务序列, 线程数
OUTPUT: parallel_map() 函数
POS:    扫描级 / 网格原点级并行的统一入口，结果顺序与输入顺序一致
"""

import logging
from typing import Callable, Iterable, List, Optional, TypeVar

from joblib import Parallel, delayed

from lungtex.config import get_config

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(
    func: Callable[[T], R],
    items: Iterable[T],
    n_jobs: Optional[int] = None,
) -> List[R]:
    """
    在线程池中并行执行 func，并按输入顺序返回结果。

    Args:
        func: 对单个任务求值的函数（必须是纯函数）
        items: 任务序列
        n_jobs: 线程数，默认取全局配置的 num_threads

    Returns:
        与 items 一一对应的结果列表
    """
    items = list(items)
    if n_jobs is None:
        n_jobs = get_config().num_threads
    if n_jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    logger.debug(f"并行执行 {len(items)} 个任务, n_jobs={n_jobs}")
    return Parallel(n_jobs=n_jobs, prefer="threads")(delayed(func)(item) for item in items)
