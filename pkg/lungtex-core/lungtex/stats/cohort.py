"""
队列特征比较

INPUT:  pandas DataFrame（每行一个受试者 / 扫描）, 分组列, 连续 / 分类变量列
OUTPUT: CohortRow 类, compare_groups(), compare_pair(), rows_to_frame() 函数
POS:    eval-stats 的队列比较，被 CLI report 命令调用（按数据划分比较定量结果）

连续变量：各组 中位数 (Q1, Q3) + Kruskal-Wallis p；
分类变量：各水平各组 n (%) + Fisher 精确检验 p（2×2 精确，更大表蒙特卡洛）。
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import pandas as pd

from lungtex.errors import StatisticsInputError
from lungtex.stats.rank_tests import fisher_exact, kruskal_wallis, median_iqr, welch_t, wilcoxon_rank_sum

logger = logging.getLogger(__name__)


@dataclass
class CohortRow:
    """比较表中的一行"""

    variable: str
    kind: str
    level: Optional[str] = None
    summaries: Dict[str, str] = field(default_factory=dict)
    test: Optional[str] = None
    p_value: Optional[float] = None

    def to_dict(self) -> dict:
        data = {"variable": self.variable, "kind": self.kind, "level": self.level}
        data.update(self.summaries)
        data["method"] = self.test
        data["p_value"] = self.p_value
        return data


def _group_order(frame: pd.DataFrame, group_column: str, groups: Optional[Sequence[str]]) -> List[str]:
    if group_column not in frame.columns:
        raise StatisticsInputError(f"缺少分组列: {group_column}")
    present = [str(g) for g in pd.unique(frame[group_column].astype(str))]
    if groups is None:
        return sorted(present)
    return [g for g in groups if g in present]


def _format_median(values: pd.Series) -> str:
    if values.empty:
        return "-"
    med, q1, q3 = median_iqr(values.to_numpy())
    return f"{med:.1f} ({q1:.1f}, {q3:.1f})"


def compare_groups(
    frame: pd.DataFrame,
    group_column: str,
    continuous: Sequence[str] = (),
    categorical: Sequence[str] = (),
    groups: Optional[Sequence[str]] = None,
    seed: int = 0,
) -> List[CohortRow]:
    """
    按分组汇总并检验。

    Args:
        frame: 数据表
        group_column: 分组列
        continuous: 连续变量列
        categorical: 分类变量列
        groups: 分组显示顺序（默认按字典序）
        seed: 蒙特卡洛 Fisher 检验的种子

    Returns:
        CohortRow 列表；检验不可计算时 p_value 为 None 并记录警告
    """
    order = _group_order(frame, group_column, groups)
    keys = frame[group_column].astype(str)
    rows: List[CohortRow] = []

    for column in continuous:
        if column not in frame.columns:
            raise StatisticsInputError(f"缺少连续变量列: {column}")
        values = {g: pd.to_numeric(frame.loc[keys == g, column]).dropna() for g in order}
        row = CohortRow(column, "continuous", summaries={g: _format_median(v) for g, v in values.items()})
        non_empty = [v.to_numpy() for v in values.values() if not v.empty]
        if len(non_empty) >= 2:
            row.test = "kruskal-wallis"
            row.p_value = kruskal_wallis(non_empty).p_value
        else:
            logger.warning(f"{column}: 有效分组少于 2 个，跳过 Kruskal-Wallis 检验")
        rows.append(row)

    for column in categorical:
        if column not in frame.columns:
            raise StatisticsInputError(f"缺少分类变量列: {column}")
        table = pd.crosstab(frame[column].astype(str), keys).reindex(columns=order, fill_value=0)
        totals = table.sum(axis=0)
        try:
            p_value = fisher_exact(table.to_numpy(), seed=seed).p_value
        except StatisticsInputError as e:
            logger.warning(f"{column}: 无法进行 Fisher 精确检验 ({e})")
            p_value = None
        for i, level in enumerate(table.index):
            summaries = {
                g: f"{int(table.loc[level, g])} ({100.0 * table.loc[level, g] / totals[g]:.1f}%)"
                if totals[g] else "-"
                for g in order
            }
            rows.append(CohortRow(
                column, "categorical", level=str(level), summaries=summaries,
                test="fisher-exact" if i == 0 else None, p_value=p_value if i == 0 else None,
            ))
    return rows


def compare_pair(
    frame: pd.DataFrame,
    group_column: str,
    first: str,
    second: str,
    columns: Sequence[str],
) -> List[dict]:
    """
    两组间逐列比较：Wilcoxon 秩和检验与 Welch t 检验。

    Returns:
        每列一个字典 {variable, n_first, n_second, wilcoxon_p, welch_p}；不可计算的检验为 None
    """
    keys = frame[group_column].astype(str)
    results = []
    for column in columns:
        a = pd.to_numeric(frame.loc[keys == first, column]).dropna().to_numpy()
        b = pd.to_numeric(frame.loc[keys == second, column]).dropna().to_numpy()
        entry = {"variable": column, f"n_{first}": len(a), f"n_{second}": len(b), "wilcoxon_p": None, "welch_p": None}
        if len(a) and len(b):
            entry["wilcoxon_p"] = wilcoxon_rank_sum(a, b).p_value
        try:
            entry["welch_p"] = welch_t(a, b).p_value
        except StatisticsInputError as e:
            logger.warning(f"{column}: 跳过 Welch t 检验 ({e})")
        results.append(entry)
    return results


def rows_to_frame(rows: Sequence[CohortRow]) -> pd.DataFrame:
    return pd.DataFrame([row.to_dict() for row in rows])
