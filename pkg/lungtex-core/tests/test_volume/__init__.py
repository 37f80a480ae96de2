"""
core-volume 测试模块

INPUT:  lungtex.volume 模块
OUTPUT: 体数据类型、RVOL 读写、坐标换算与阈值肺掩膜的测试用例
POS:    确保体数据层正确性
"""
