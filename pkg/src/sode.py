"""
解纠缠速度 (SoDE) - 微扰法求解器、有限差分校验与各解析公式

η = |d𝒩/dt|_{t=0} = η⁽⁻⁾ − η⁽⁰⁾：
η⁽⁻⁾ 来自 ρ^{T_i} 负本征子空间，η⁽⁰⁾ 来自零本征子空间上 σ^{T_i} 的负本征值。
"""

import logging
import math
from typing import Iterable, Sequence, Tuple

import numpy as np

from . import measures
from .channels import apply_channel, generator
from .data_models import (
    ChannelKind,
    EtaFormula,
    FamilyTag,
    FormulaTag,
    InvariantSet,
    MeasureKind,
    QuantumState,
    SodeReport,
    StateFamily,
)
from .errors import InfeasibleParametersError, InvalidArgumentError, SingularInputError
from .linalg import hermitian_eigendecompose, partial_transpose, project, trace_norm
from .states import build

logger = logging.getLogger(__name__)

# 零本征值判据 ε₀ = ZERO_REL_TOL · max(1, 谱半径)
ZERO_REL_TOL = 1e-9
NEGATIVE_ETA_TOL = 1e-9
RANGE_TOL = 1e-12


def zero_tolerance(values: np.ndarray) -> float:
    return ZERO_REL_TOL * max(1.0, float(np.max(np.abs(values))))


def sode_perturbative(state: QuantumState, qubit: int = 0,
                      kind: ChannelKind = ChannelKind.DEPOLARIZING) -> SodeReport:
    """微扰法计算第 qubit 个比特与其余部分之间的 SoDE"""
    if not isinstance(qubit, (int, np.integer)) or not 0 <= qubit < state.k:
        raise InvalidArgumentError(f"比特下标越界 qubit={qubit}（k={state.k}）")
    kind = ChannelKind.parse(kind)

    rho_t = partial_transpose(state.rho, qubit, state.k)
    sigma_t = partial_transpose(generator(state, kind), qubit, state.k)
    system = hermitian_eigendecompose(rho_t)
    eps0 = zero_tolerance(system.values)

    negative = system.values < -eps0
    zero = np.abs(system.values) <= eps0

    neg_vectors = system.vectors[:, negative]
    eta_minus = 2.0 * float(np.real(np.trace(project(sigma_t, neg_vectors)))) if negative.any() else 0.0

    eta_zero = 0.0
    if zero.any():
        sigma_zero = project(sigma_t, system.vectors[:, zero])
        sigma_zero = (sigma_zero + sigma_zero.conj().T) / 2
        eta_zero = max(0.0, trace_norm(sigma_zero) - float(np.real(np.trace(sigma_zero))))

    negativity = float(2.0 * -np.sum(system.values[negative]))
    eta = eta_minus - eta_zero
    if eta < 0.0:
        if eta >= -NEGATIVE_ETA_TOL:
            eta = 0.0
        else:
            logger.warning("⚠️ η 为负 η=%.3e（η⁻=%.6g, η⁰=%.6g, qubit=%d）", eta, eta_minus, eta_zero, qubit)

    t_star, r = robustness(negativity, max(eta, 0.0))
    logger.debug("SoDE qubit=%d channel=%s d₋=%d d₀=%d η=%.12g",
                 qubit, kind.value, int(negative.sum()), int(zero.sum()), eta)
    return SodeReport(
        eta=eta,
        eta_minus=eta_minus,
        eta_zero=eta_zero,
        negativity=negativity,
        t_star=t_star,
        robustness=r,
        neg_dim=int(negative.sum()),
        zero_dim=int(zero.sum()),
        qubit=int(qubit),
        channel=kind,
    )


def _measure_value(state: QuantumState, qubit: int, measure: MeasureKind) -> float:
    if measure is MeasureKind.NEGATIVITY:
        return measures.negativity(state, qubit)
    return measures.concurrence2(state)


def sode_finite_difference(state: QuantumState, qubit: int = 0,
                           kind: ChannelKind = ChannelKind.DEPOLARIZING,
                           dt: float = 1e-9,
                           measure: MeasureKind = MeasureKind.NEGATIVITY) -> float:
    """(m(ρ) − m(ε_dt(ρ)))/dt"""
    if not dt > 0:
        raise InvalidArgumentError(f"dt 必须为正 dt={dt}")
    try:
        measure = MeasureKind(measure)
    except ValueError:
        raise InvalidArgumentError(f"未知的纠缠度量 measure={measure}")
    if measure is MeasureKind.CONCURRENCE2 and state.k != 2:
        raise InvalidArgumentError(f"concurrence2 的有限差分需要两比特态 k={state.k}")
    evolved = apply_channel(state, dt, kind)
    return (_measure_value(state, qubit, measure) - _measure_value(evolved, qubit, measure)) / dt


def eta_concurrence(state: QuantumState, kind: ChannelKind = ChannelKind.DEPOLARIZING,
                    dt: float = 1e-9) -> float:
    """两比特并发度的衰减速度 η^C（有限差分）"""
    return sode_finite_difference(state, 0, kind, dt, MeasureKind.CONCURRENCE2)


# ---------------------------------------------------------------------------
# 解析公式
# ---------------------------------------------------------------------------

def _unit_interval(name: str, value: float) -> float:
    if not -RANGE_TOL <= value <= 1.0 + RANGE_TOL:
        raise InvalidArgumentError(f"{name} 必须在 [0,1] 内 {name}={value}")
    return min(max(value, 0.0), 1.0)


def _require_k(k: int, lo: int) -> int:
    if int(k) != k or k < lo:
        raise InvalidArgumentError(f"k 必须是 ≥ {lo} 的整数 k={k}")
    return int(k)


def eta_pure2(n: float) -> float:
    """两比特纯态 η = 2𝒩 + 1"""
    n = _unit_interval("n", n)
    return 2.0 * n + 1.0


def eta_bounds2(n: float) -> Tuple[float, float]:
    """两比特任意态的 (下界, 上界)"""
    n = _unit_interval("n", n)
    root = math.sqrt(2.0 * n * (n + 1.0))
    lower = (n * n + root) / (1.0 + 2.0 * n - root)
    return lower, 2.0 * n + 1.0


def eta_rho_c(n: float, c: float) -> float:
    """ρ_C 族：η = 2𝒩+1 − 2(1−𝒞)(𝒞−𝒩)(1+𝒩)/(𝒩²−𝒞²+2𝒞(1+𝒩))"""
    n = _unit_interval("n", n)
    c = _unit_interval("c", c)
    if n <= 0.0 or c < n - RANGE_TOL or n < measures.negativity_min_for_concurrence(c) - 1e-9:
        raise InfeasibleParametersError(f"ρ_C 中不存在 (n, c)=({n}, {c}) 的态")
    denominator = n * n - c * c + 2.0 * c * (1.0 + n)
    return 2.0 * n + 1.0 - 2.0 * (1.0 - c) * (c - n) * (1.0 + n) / denominator


def eta_g3(n: float) -> float:
    """三比特对称纯态下界（GHZ 型）3𝒩 + ½"""
    return 3.0 * _unit_interval("n", n) + 0.5


def eta_j3(n: float) -> float:
    """三比特对称纯态上界（|J⟩ 族）(5/2)𝒩 + 1"""
    return 2.5 * _unit_interval("n", n) + 1.0


def eta_sym3(n: float, tau: float, i4: float) -> float:
    """三比特对称纯态"""
    if n <= 0.0:
        raise SingularInputError(f"eta_sym3 需要 n > 0 n={n}")
    numerator = 32 - 32 * i4 - 12 * n ** 2 + 84 * n ** 3 + 69 * n ** 4 + 3 * tau ** 2
    return numerator / (24 * n ** 2 * (n + 1))


def _gen3_main(inv: InvariantSet, imbalance: float) -> float:
    n = inv.N1
    numerator = (-16 - 12 * imbalance - 32 * inv.I4 + 36 * n ** 2 + 84 * n ** 3
                 + 57 * n ** 4 + 12 * (inv.I2 + inv.I3) * (2 - n ** 2))
    return numerator / (24 * n ** 2 * (n + 1))


def theta_tolerance(inv: InvariantSet) -> float:
    """Θ 分段用的 ε₀，取法与求解器的零本征值判据相同"""
    return zero_tolerance(np.array([(inv.I2 - inv.I3) ** 2, inv.tau ** 2 / 4, inv.M]))


def _theta_positive(inv: InvariantSet) -> bool:
    return inv.Theta > theta_tolerance(inv)


def _require_n1(inv: InvariantSet, what: str) -> float:
    if inv.N1 <= 0.0:
        raise SingularInputError(f"{what} 需要 N1 > 0 N1={inv.N1}")
    return inv.N1


def eta_gen3(inv: InvariantSet) -> float:
    """任意三比特纯态（第一个比特），按 Θ 的符号分段"""
    n = _require_n1(inv, "eta_gen3")
    value = _gen3_main(inv, inv.Theta)
    if _theta_positive(inv):
        value -= (math.sqrt(inv.M ** 2 + n ** 2 * inv.Theta) - inv.M) / n ** 2
    return value


def eta_lambda_parts(inv: InvariantSet) -> Tuple[float, float]:
    """|Λ⟩ 族的 (η⁽⁻⁾, η⁽⁰⁾)"""
    n = _require_n1(inv, "eta_lambda_parts")
    gap = 1.0 - inv.I3
    eta_minus = 2.5 * n + 1.0 - (1.0 - n) * gap / n ** 2
    eta_zero = 0.0
    if _theta_positive(inv):
        eta_zero = (math.sqrt(gap ** 2 + n ** 2 * inv.Theta) - gap) / n ** 2
    return eta_minus, eta_zero


def eta_omega(inv: InvariantSet) -> float:
    """无三体缠结 (τ = 0) 的 |Ω⟩ 族"""
    n = _require_n1(inv, "eta_omega")
    imbalance = (inv.I2 - inv.I3) ** 2
    return _gen3_main(inv, imbalance) - (math.sqrt(inv.M ** 2 + imbalance * n ** 2) - inv.M) / n ** 2


def eta_ghz_k(k: int, n: float) -> float:
    """k ≥ 3 的 GHZ 型态 η = k𝒩 + ½"""
    k = _require_k(k, 3)
    return k * _unit_interval("n", n) + 0.5


def eta_w_k(k: int) -> float:
    k = _require_k(k, 2)
    return ((k + 2) * math.sqrt(k - 1) + 2 * (k - 1) - (k - 2) * math.sqrt(k - 2)) / k


def eta_dephasing_ghz_k(k: int, n: float) -> float:
    """退相位信道下 GHZ 型态 η = k𝒩"""
    k = _require_k(k, 2)
    return k * _unit_interval("n", n)


def eta_concurrence_ghz_bounds(k: int, c: float) -> Tuple[float, float]:
    """GHZ 型态并发度速度的 (下界, 上界)"""
    k = _require_k(k, 3)
    c = _unit_interval("c", c)
    return k * c + c / 2, k * c + 0.5


def ghz_w_gap(k: int) -> float:
    """同为 W_k 负性时 GHZ 型态与 W_k 的 SoDE 之差"""
    k = _require_k(k, 3)
    return eta_ghz_k(k, measures.w_k_negativity(k)) - eta_w_k(k)


def theta_criterion(inv: InvariantSet, tol: float = 1e-8) -> bool:
    """Θ > tol 时零子空间贡献 η⁽⁰⁾ 非零"""
    return inv.Theta > tol


def tangle_imbalance(inv: InvariantSet) -> float:
    """|τ₁₂ − τ₁₃| − τ，与 Θ 同号"""
    return abs(inv.C12 ** 2 - inv.C13 ** 2) - inv.tau


_FORMULAS = {
    FormulaTag.PURE2: lambda p: eta_pure2(p["n"]),
    FormulaTag.BOUNDS2: lambda p: eta_bounds2(p["n"]),
    FormulaTag.RHO_C: lambda p: eta_rho_c(p["n"], p["c"]),
    FormulaTag.G3: lambda p: eta_g3(p["n"]),
    FormulaTag.J3: lambda p: eta_j3(p["n"]),
    FormulaTag.SYM3: lambda p: eta_sym3(p["n"], p["tau"], p["i4"]),
    FormulaTag.GEN3: lambda p: eta_gen3(p["inv"]),
    FormulaTag.GHZ_K: lambda p: eta_ghz_k(p["k"], p["n"]),
    FormulaTag.W_K: lambda p: eta_w_k(p["k"]),
    FormulaTag.DEPH_GHZ_K: lambda p: eta_dephasing_ghz_k(p["k"], p["n"]),
}


def evaluate_formula(formula: EtaFormula):
    """按标签求值解析公式；Bounds2 返回 (下界, 上界)"""
    try:
        return _FORMULAS[formula.tag](formula.params)
    except KeyError as exc:
        raise InvalidArgumentError(f"公式 {formula.tag.value} 缺少参数 {exc}")


# ---------------------------------------------------------------------------
# 鲁棒性与相位影响
# ---------------------------------------------------------------------------

def robustness(n: float, eta: float) -> Tuple[float, float]:
    """T* = 𝒩/η，R_η = 1 − e^{−T*}"""
    if n <= 0.0:
        return 0.0, 0.0
    if eta <= 0.0:
        return math.inf, 1.0
    t_star = n / eta
    return t_star, -math.expm1(-t_star)


def z_state_etas(k: int, q: float, phi_grid: Iterable[float], qubit: int = 0,
                 kind: ChannelKind = ChannelKind.DEPOLARIZING) -> np.ndarray:
    etas = [
        sode_perturbative(build(StateFamily(FamilyTag.Z_STATE, {"k": k, "q": q, "phi": phi})), qubit, kind).eta
        for phi in phi_grid
    ]
    return np.asarray(etas, dtype=float)


def delta_eta_phase(k: int, q: float, phi_grid: Sequence[float], qubit: int = 0,
                    kind: ChannelKind = ChannelKind.DEPOLARIZING) -> float:
    """相位 φ 对 |Z(q,φ)⟩_k 的 SoDE 的最大影响"""
    if len(phi_grid) == 0:
        raise InvalidArgumentError("phi_grid 不能为空")
    etas = z_state_etas(k, q, phi_grid, qubit, kind)
    return float(np.max(etas) - np.min(etas))


def phi_grid(points: int) -> np.ndarray:
    """[0, 2π) 上的等距网格"""
    if points < 1:
        raise InvalidArgumentError(f"phi_points 必须 ≥ 1 phi_points={points}")
    return np.linspace(0.0, 2 * math.pi, points, endpoint=False)
