"""
lungtex 异常定义

INPUT:  无
OUTPUT: LungTexError 及其子类
POS:    异常层次，被所有模块依赖；CLI 据此区分校验错误 (exit 1) 与运行时错误 (exit 2)
"""


class LungTexError(Exception):
    """lungtex 所有异常的基类"""


class InputValidationError(LungTexError, ValueError):
    """输入违反契约（前置条件、格式、取值范围）"""


class VolumeFormatError(InputValidationError):
    """RVOL 文件缺失、头信息非法或数据长度不符"""


class GridMismatchError(InputValidationError):
    """体数据与掩膜的网格（尺寸/体素间距）不一致"""


class FootprintOutOfBoundsError(InputValidationError):
    """patch 足迹超出体数据边界"""


class InfeasibleSamplingError(InputValidationError):
    """某个纹理类别没有任何可行的候选中心"""


class ModelFileError(InputValidationError):
    """权重文件的魔数、版本或校验和不正确"""


class StatisticsInputError(InputValidationError):
    """统计检验输入退化（标签单一、秩方差为零、空列联表等）"""


class ClinicalDataError(InputValidationError):
    """临床 CSV 缺少关联键或分级取值非法"""
