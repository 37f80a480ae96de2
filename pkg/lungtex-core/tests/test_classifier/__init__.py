"""
classifier 测试模块

INPUT:  lungtex.classifier 模块
OUTPUT: 配置、预处理、网络、训练、权重文件与超参数搜索的测试用例
POS:    确保 patch 分类器的训练与推理正确、可复现
"""
