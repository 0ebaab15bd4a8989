class WernerAnalysisError(ValueError):
    """纠缠分析错误基类"""


class InvalidDimensionError(WernerAnalysisError):
    """维度不合法"""


class UnsupportedDimensionError(WernerAnalysisError):
    """解析公式不支持该维度"""


class InvalidParameterError(WernerAnalysisError):
    """参数不合法"""


class NormalizationError(WernerAnalysisError):
    """相位分布未归一化"""

    def __init__(self, integral: float):
        self.integral = integral
        super().__init__(f"相位分布未归一化，积分值为 {integral:.12g}")


class IncompleteSpecError(WernerAnalysisError):
    """退相干系数缺失"""


class InvalidOperatorError(WernerAnalysisError):
    """算符不满足要求"""


class InvalidIndexError(WernerAnalysisError):
    """指标越界"""


class UnsupportedCoefficientError(WernerAnalysisError):
    """不支持复数退相干系数"""


class MissingSolutionsError(WernerAnalysisError):
    """缺少可分离本征解"""


class InconsistentSystemError(WernerAnalysisError):
    """Gram方程组无解"""

    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(f"Gram方程组无解，最小二乘残差为 {residual:.3e}，本征向量族可能不完整")


class InvalidRangeError(WernerAnalysisError):
    """搜索区间不合法"""


class InvalidDistributionError(WernerAnalysisError):
    """准概率分布不合法"""


class SolverDisagreementError(WernerAnalysisError):
    """核投影解与伪逆解不一致"""

    def __init__(self, disagreement: float):
        self.disagreement = disagreement
        super().__init__(f"核投影解与伪逆解偏差 {disagreement:.3e}")
