"""
phantom 测试模块

INPUT:  lungtex.phantom 模块
OUTPUT: 体模规格与生成器的测试用例
POS:    确保合成数据的标签真值与密度排序
"""
