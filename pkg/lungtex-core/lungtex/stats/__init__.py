"""
统计模块

INPUT:  无
OUTPUT: AUC / ROC、秩检验、队列比较的公共函数
POS:    eval-stats 模块入口
"""

from lungtex.stats.auc import (
    SplitEvaluation,
    auc_binary,
    auc_table,
    build_evaluation_report,
    evaluate_split,
    multiclass_auc,
    roc_curves,
    roc_points,
    write_roc_csv,
    write_roc_svg,
)
from lungtex.stats.cohort import CohortRow, compare_groups, compare_pair, rows_to_frame
from lungtex.stats.rank_tests import (
    TestResult,
    fisher_exact,
    kruskal_wallis,
    median_iqr,
    pearson_chi2,
    spearman,
    welch_t,
    wilcoxon_rank_sum,
)

__all__ = [
    # AUC / ROC
    "auc_binary",
    "multiclass_auc",
    "auc_table",
    "roc_points",
    "roc_curves",
    "write_roc_csv",
    "write_roc_svg",
    "SplitEvaluation",
    "evaluate_split",
    "build_evaluation_report",
    # 检验
    "TestResult",
    "spearman",
    "kruskal_wallis",
    "wilcoxon_rank_sum",
    "welch_t",
    "pearson_chi2",
    "fisher_exact",
    "median_iqr",
    # 队列比较
    "CohortRow",
    "compare_groups",
    "compare_pair",
    "rows_to_frame",
]
