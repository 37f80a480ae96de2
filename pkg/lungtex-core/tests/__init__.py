"""
lungtex-core 测试包

INPUT:  lungtex 各子包
OUTPUT: 单元 / 集成测试用例
POS:    核心库测试入口
"""
