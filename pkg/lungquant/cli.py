"""
lungquant 命令行入口

INPUT:  命令行参数, CLISettings, 运行配置 JSON
OUTPUT: build_parser(), configure_runtime(), main() 函数, EXIT_OK / EXIT_VALIDATION / EXIT_RUNTIME 常量
POS:    唯一的命令行入口：校验配置、设置 lungtex-core 运行时、分派子命令并映射退出码

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from lungtex import __version__ as core_version
from lungtex.config import LungTexConfig, set_config
from lungtex.errors import InputValidationError
from lungtex.mlflow import init_mlflow

from lungquant import __version__
from lungquant.commands import COMMANDS, CommandContext
from lungquant.schemas import RunConfig, load_run_config
from lungquant.settings import CLISettings, get_cli_settings
from lungquant.utils.file_ops import ArtifactLayout

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

_HELP = {
    "phantom": "生成合成纹理体模队列与清单",
    "atlas": "由已标注扫描汇编纹理图谱",
    "sample": "按扫描划分并采样类别平衡的 patch",
    "train": "训练 patch 分类器",
    "hypersearch": "交叉验证超参数网格搜索",
    "classify": "整肺重建类别图",
    "quantify": "按类别统计肺体积百分比",
    "evaluate": "逐划分计算 AUC 与 ROC",
    "correlate": "定量结果与临床数据的相关分析",
    "report": "汇总全部产物为报告",
}


def build_parser() -> argparse.ArgumentParser:
    """构建 argparse 解析器：每个子命令共享 --config / --out / --threads / --seed / --verbose"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", help="运行配置 JSON (默认: 全部取默认值)")
    common.add_argument("--out", "-o", help="输出目录 (默认: LUNGQUANT_OUT_DIR 或 out)")
    common.add_argument("--threads", "-t", type=int, help="工作线程数，不影响结果")
    common.add_argument("--seed", type=int, help="覆盖运行配置中的 rng_seed")
    common.add_argument("--verbose", "-v", action="store_true", help="输出 DEBUG 日志")

    parser = argparse.ArgumentParser(
        prog="lungquant",
        description="基于 patch 的肺实质纹理分类与定量",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
示例:
    # 桌面规模端到端流程
    lungquant phantom --config run.json --out out/
    lungquant atlas --config run.json --out out/
    lungquant sample --config run.json --out out/
    lungquant train --config run.json --out out/ --threads 4
    lungquant classify --config run.json --out out/
    lungquant quantify --config run.json --out out/

    # 评估预计算概率
    lungquant evaluate --probabilities probs.csv --out out/

    # 临床相关
    lungquant correlate --clinical clinical.csv --out out/
        """,
    )
    parser.add_argument("--version", action="version", version=f"lungquant {__version__} (lungtex {core_version})")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    for name in COMMANDS:
        sub = subparsers.add_parser(name, parents=[common], help=_HELP[name], description=_HELP[name])
        if name in ("classify", "quantify"):
            sub.add_argument("--scan", action="append", default=[], help="只处理指定扫描（可重复）")
        if name == "evaluate":
            sub.add_argument("--probabilities", help="预计算概率 CSV (split, true_label, p_normal..p_emphysema)")
        if name == "correlate":
            sub.add_argument("--clinical", help="临床 CSV (scan_id, dlco_pct, emphysema_grade, fibrosis_grade)")
    return parser


def configure_runtime(settings: CLISettings, run: RunConfig, threads: Optional[int]) -> LungTexConfig:
    """
    设置 lungtex-core 全局配置。

    --threads 优先于 LUNGQUANT_THREADS，二者只影响工作线程池；
    运行配置中的 lung_mask 覆盖核心配置的阈值肺掩膜参数。
    """
    config = LungTexConfig.load(Path(settings.core_config) if settings.core_config else None)
    if threads is not None and threads < 1:
        raise InputValidationError(f"--threads 必须 >= 1，当前为 {threads}")
    overrides = {}
    threads = threads or settings.threads
    if threads:
        overrides["num_threads"] = threads
    if run.lung_mask.hu_threshold is not None:
        overrides["lung_hu_threshold"] = run.lung_mask.hu_threshold
    if run.lung_mask.min_component_voxels is not None:
        overrides["lung_min_component_voxels"] = run.lung_mask.min_component_voxels
    config = config.with_overrides(**overrides)
    set_config(config)
    return config


def main(argv: Optional[List[str]] = None) -> int:
    """
    解析参数并执行子命令。

    Returns:
        0 成功；1 配置或输入校验失败；2 其他运行错误
    """
    args = build_parser().parse_args(argv)
    settings = get_cli_settings()
    logging.basicConfig(level="DEBUG" if args.verbose else settings.log_level, format=LOG_FORMAT)

    try:
        run = load_run_config(args.config, seed=args.seed)
        configure_runtime(settings, run, args.threads)

        # 初始化 MLflow
        if init_mlflow():
            logger.info("✅ MLflow 追踪已启用")
        else:
            logger.info("ℹ️  MLflow 追踪已禁用")

        ctx = CommandContext(
            run=run,
            layout=ArtifactLayout(Path(args.out or settings.out_dir)),
            settings=settings,
            scans=getattr(args, "scan", []),
            probabilities=getattr(args, "probabilities", None),
            clinical=getattr(args, "clinical", None),
        )
        result = COMMANDS[args.command](ctx)
    except (ValidationError, InputValidationError) as e:
        logger.error(f"❌ {args.command} 校验失败: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as e:
        logger.exception(f"❌ {args.command} 运行失败: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME

    logger.info(f"✅ {args.command} 完成，写出 {len(result.outputs)} 个文件")
    return EXIT_OK
