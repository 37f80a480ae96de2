"""
reconstruct-quantify 测试模块

INPUT:  lungtex.reconstruct 模块
OUTPUT: 滑动窗口重建、定量与临床关联的测试用例
POS:    确保整肺定量的覆盖与计数正确
"""
