"""
lungquant 应用入口

INPUT:  lungquant.cli, 当前目录下的 .env
OUTPUT: main() 函数，命令行退出码
POS:    应用程序入口点（console script 目标），具体流程见 lungquant/cli.py

.env 在这里加载，使 LUNGTEX_* / MLFLOW_* 也能被 lungtex-core 的 LungTexConfig.from_env 读到；
已存在的环境变量不会被覆盖。

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import sys

from dotenv import load_dotenv

from lungquant.cli import main as cli_main


def main() -> None:
    """加载 .env 后执行 lungquant 命令行并以其退出码退出。"""
    load_dotenv(".env", override=False)
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
