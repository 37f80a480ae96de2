"""
patch-atlas 测试模块

INPUT:  lungtex.atlas 模块
OUTPUT: 规格、足迹提取、图谱、采样、划分、归档与清单的测试用例
POS:    确保 patch 数据准备层正确性
"""
