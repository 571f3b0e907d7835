"""
错误定义 - 所有模块共享的异常层级，每个异常携带稳定的机器码
"""


class SodeLabError(Exception):
    """SoDELab 异常基类"""

    code = "sodelab-error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def one_line(self) -> str:
        """单行、可机器解析的错误描述（CLI 输出到 stderr）"""
        text = " ".join(self.message.split())
        return f"error={self.code} message={text}"


class InvalidShapeError(SodeLabError, ValueError):
    """矩阵维度与量子比特数不匹配"""

    code = "invalid-shape"


class InvalidArgumentError(SodeLabError, ValueError):
    """参数越界、归一化失败等"""

    code = "invalid-argument"


class InfeasibleParametersError(SodeLabError, ValueError):
    """参数组合不存在物理态（例如求根无解）"""

    code = "infeasible-parameters"


class SingularInputError(SodeLabError, ValueError):
    """闭式公式在奇点处求值（如 𝒩 = 0）"""

    code = "singular-input"


class UnknownScenarioError(SodeLabError):
    """未注册的场景名称"""

    code = "unknown-scenario"


class OutputError(SodeLabError):
    """数据集写出失败"""

    code = "output-error"


class ConfigError(SodeLabError):
    """用户配置文件格式错误"""

    code = "config-error"
