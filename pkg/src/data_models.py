"""
数据模型 - 定义量子态、信道、SoDE 报告与实验记录的数据结构
"""

from typing import Any, Dict, Optional, Tuple
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidArgumentError


class ChannelKind(Enum):
    """局域噪声信道类型（衰减常数 κ 固定为 1，时间无量纲）"""
    DEPOLARIZING = "depolarizing"
    DEPHASING = "dephasing"

    @classmethod
    def parse(cls, value: "ChannelKind | str") -> "ChannelKind":
        if isinstance(value, cls):
            return value
        for kind in cls:
            if kind.value == str(value).lower():
                return kind
        raise InvalidArgumentError(f"未知的信道类型 channel={value}")


class MeasureKind(Enum):
    """有限差分所用的纠缠度量"""
    NEGATIVITY = "negativity"
    CONCURRENCE2 = "concurrence2"


class FamilyTag(Enum):
    """态族标签"""
    PURE_THETA = "PureTheta"
    ANSATZ = "Ansatz"
    RHO_M = "RhoM"
    RHO_K = "RhoK"
    RHO_C = "RhoC"
    RHO_SL = "RhoSL"
    RHO_ITOT = "RhoItot"
    GHZ = "GHZ"
    W = "W"
    W_PRIME = "WPrime"
    SYMMETRIC = "Symmetric"
    G_TYPE = "GType"
    J_STATE = "JState"
    UPSILON = "Upsilon"
    LAMBDA = "Lambda"
    OMEGA = "Omega"
    GENERAL3 = "General3"
    G_TYPE_K = "GTypeK"
    W_K = "WK"
    Z_STATE = "ZState"
    PI = "Pi"
    MU = "Mu"


class OutputFormat(Enum):
    """数据集输出格式"""
    CSV = "csv"
    JSON = "json"


@dataclass(eq=False)
class QuantumState:
    """k 比特量子态：密度矩阵，纯态时附带振幅"""
    k: int
    rho: np.ndarray
    purity_hint: bool = False
    amplitudes: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return 2 ** self.k


@dataclass(frozen=True)
class StateFamily:
    """带参数的态族"""
    tag: FamilyTag
    params: Dict[str, Any] = field(default_factory=dict)


@dataclass(eq=False)
class EigenSystem:
    """厄米矩阵的本征系统：本征值升序，本征向量按列存放"""
    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class SodeReport:
    """单次 (态, 比特, 信道) 查询的解纠缠速度报告"""
    eta: float
    eta_minus: float
    eta_zero: float
    negativity: float
    t_star: float
    robustness: float
    neg_dim: int
    zero_dim: int
    qubit: int = 0
    channel: ChannelKind = ChannelKind.DEPOLARIZING


class FormulaTag(Enum):
    """解析 SoDE 公式标签"""
    PURE2 = "Pure2"
    BOUNDS2 = "Bounds2"
    RHO_C = "RhoC"
    G3 = "G3"
    J3 = "J3"
    SYM3 = "Sym3"
    GEN3 = "Gen3"
    GHZ_K = "GhzK"
    W_K = "WK"
    DEPH_GHZ_K = "DephGhzK"


@dataclass(frozen=True)
class EtaFormula:
    """带参数的解析公式（𝒩、𝒞、k 或 InvariantSet）"""
    tag: FormulaTag
    params: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class InvariantSet:
    """三比特纯态的局域幺正不变量"""
    I1: float
    I2: float
    I3: float
    I4: float
    I5: float
    tau: float
    N1: float
    N2: float
    N3: float
    C12: float
    C13: float
    C23: float
    Theta: float
    M: float


@dataclass(frozen=True)
class ScenarioConfig:
    """一次场景运行的完整配置"""
    scenario: str
    samples: int
    seed: int
    channel: ChannelKind = ChannelKind.DEPOLARIZING
    qubit: int = 0
    out: Optional[str] = None
    fmt: OutputFormat = OutputFormat.CSV
    workers: int = 1
    variant: Optional[str] = None
    k_values: Tuple[int, ...] = (3, 4, 5)
    q_step: float = 0.05
    phi_points: int = 64
    grid_points: int = 41
    dt: float = 1e-9
    lu_per_state: int = 100
    dump_states: Optional[str] = None


# 数据集固定列顺序（版本号写在 CSV 首行注释中）
DATASET_VERSION = 1
CORE_COLUMNS: Tuple[str, ...] = (
    "index",
    "negativity",
    "concurrence",
    "eta",
    "eta_minus",
    "eta_zero",
    "linear_entropy",
    "mutual_information",
    "xi1",
    "chi1",
    "xi2",
    "chi2",
)


@dataclass
class SampleRecord:
    """数据集中的一行"""
    index: int
    negativity: Optional[float] = None
    concurrence: Optional[float] = None
    eta: Optional[float] = None
    eta_minus: Optional[float] = None
    eta_zero: Optional[float] = None
    linear_entropy: Optional[float] = None
    mutual_information: Optional[float] = None
    xi1: Optional[float] = None
    chi1: Optional[float] = None
    xi2: Optional[float] = None
    chi2: Optional[float] = None
    params: Dict[str, Any] = field(default_factory=dict)
    # 仅在需要导出态时保留，不进入数据集列
    state: Optional[QuantumState] = field(default=None, repr=False, compare=False)

    def as_row(self, param_columns: Tuple[str, ...]) -> Dict[str, Any]:
        row = {name: getattr(self, name) for name in CORE_COLUMNS}
        for name in param_columns:
            row[name] = self.params.get(name)
        return row
