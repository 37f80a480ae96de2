"""
lungquant - 肺纹理定量命令行应用

INPUT:  lungtex-core
OUTPUT: __version__
POS:    应用包入口，子命令实现见 commands/，命令行入口见 cli.py
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
