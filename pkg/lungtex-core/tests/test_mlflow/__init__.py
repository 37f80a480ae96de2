"""
MLflow 集成测试模块

INPUT:  lungtex.mlflow 模块
OUTPUT: 追踪函数的测试用例（使用 mock，不依赖真实服务）
POS:    确保禁用时空操作、启用时调用正确
"""
