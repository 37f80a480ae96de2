"""
eval-stats 测试模块

INPUT:  lungtex.stats 模块
OUTPUT: AUC / ROC、秩检验与队列比较的测试用例
POS:    以穷举 / 置换基准校验统计量
"""
