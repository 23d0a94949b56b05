"""
异常定义
所有库内错误都继承 QuadCurlError，CLI 据此区分数值失败（退出码 1）与用法错误（退出码 2）
"""


class QuadCurlError(Exception):
    """库内错误基类"""


class InvalidSubdivisionError(QuadCurlError, ValueError):
    """区域无法按给定的每单位剖分数构造结构网格"""


class QuadratureDegreeError(QuadCurlError, ValueError):
    """请求的求积精度超出支持范围"""


class ContractError(QuadCurlError, ValueError):
    """违反接口约定（非法编号、边界边传入内部边运算等）"""


class UnisolvenceError(QuadCurlError, RuntimeError):
    """单元自由度 Vandermonde 矩阵数值奇异"""

    def __init__(self, message: str, triangle=None, condition: float = None):
        super().__init__(message)
        self.triangle = triangle
        self.condition = condition


class SolverError(QuadCurlError, RuntimeError):
    """线性/特征求解失败，附带网格与次数信息"""

    def __init__(self, message: str, context: dict = None):
        if context:
            details = ", ".join(f"{key}={value}" for key, value in context.items())
            message = f"{message} ({details})"
        super().__init__(message)
        self.context = context or {}


class ConvergenceError(SolverError):
    """迭代在上限内未收敛"""
