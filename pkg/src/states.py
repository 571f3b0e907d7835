"""
量子态构造 - 各态族、随机采样、混合与随机局域幺正变换
"""

import logging
import math
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.optimize
from scipy.stats import unitary_group

from .data_models import FamilyTag, QuantumState, StateFamily
from .errors import InfeasibleParametersError, InvalidArgumentError, InvalidShapeError
from .linalg import (
    PAULI_X,
    IDENTITY2,
    as_matrix,
    basis_index,
    hermitian_eigenvalues,
    is_hermitian,
    kron_all,
    qubit_count,
)

logger = logging.getLogger(__name__)

NORM_TOL = 1e-10
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
WEIGHT_TOL = 1e-12
ITOT_XTOL = 1e-14


# ---------------------------------------------------------------------------
# 基本构造
# ---------------------------------------------------------------------------

def from_amplitudes(amplitudes: Sequence[complex], normalize: bool = False) -> QuantumState:
    """由振幅向量构造纯态"""
    vec = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    k = qubit_count(vec.size)
    norm = float(np.vdot(vec, vec).real)
    if normalize:
        if norm <= 0.0:
            raise InvalidArgumentError("振幅向量为零，无法归一化")
        vec = vec / math.sqrt(norm)
    elif abs(norm - 1.0) > NORM_TOL:
        raise InvalidArgumentError(f"振幅未归一化 norm={norm:.12g}")
    rho = np.outer(vec, vec.conj())
    return QuantumState(k=k, rho=rho, purity_hint=True, amplitudes=vec)


def from_density_matrix(rho) -> QuantumState:
    """由密度矩阵构造混态，检查迹、厄米性与半正定性"""
    m = as_matrix(rho)
    k = qubit_count(m.shape[0])
    trace = complex(np.trace(m))
    if abs(trace - 1.0) > TRACE_TOL:
        raise InvalidArgumentError(f"密度矩阵的迹不为 1 trace={trace.real:.12g}")
    if not is_hermitian(m):
        raise InvalidArgumentError("密度矩阵不是厄米矩阵 rho")
    m = (m + m.conj().T) / 2
    lowest = float(hermitian_eigenvalues(m)[0])
    if lowest < -PSD_TOL:
        raise InvalidArgumentError(f"密度矩阵不是半正定的 min_eigenvalue={lowest:.3e}")
    return QuantumState(k=k, rho=m)


def purity(state: QuantumState) -> float:
    return float(np.real(np.trace(state.rho @ state.rho)))


def product_state(bits: Sequence[int]) -> QuantumState:
    """计算基矢 |b0 b1 ...⟩"""
    vec = np.zeros(2 ** len(bits), dtype=np.complex128)
    vec[basis_index(bits)] = 1.0
    return from_amplitudes(vec)


def maximally_mixed(k: int) -> QuantumState:
    d = 2 ** k
    return QuantumState(k=k, rho=np.eye(d, dtype=np.complex128) / d)


# ---------------------------------------------------------------------------
# 参数检查
# ---------------------------------------------------------------------------

def _param(params: Mapping[str, Any], name: str, default: Any = None) -> Any:
    if name in params:
        return params[name]
    if default is not None:
        return default
    raise InvalidArgumentError(f"缺少参数 {name}")


def _real(params: Mapping[str, Any], name: str, lo: float = -math.inf,
          hi: float = math.inf, default: Optional[float] = None) -> float:
    value = _param(params, name, default)
    if isinstance(value, complex) or np.iscomplexobj(value):
        raise InvalidArgumentError(f"参数必须是实数 {name}={value}")
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise InvalidArgumentError(f"参数必须是实数 {name}={value!r}")
    if not math.isfinite(value) or value < lo or value > hi:
        raise InvalidArgumentError(f"参数超出范围 {name}={value}（允许 [{lo}, {hi}]）")
    return value


def _complex(params: Mapping[str, Any], name: str, default: Optional[complex] = None) -> complex:
    value = _param(params, name, default)
    try:
        return complex(value)
    except (TypeError, ValueError):
        raise InvalidArgumentError(f"参数必须是数值 {name}={value!r}")


def _qubits(params: Mapping[str, Any], lo: int, default: Optional[int] = None) -> int:
    value = _param(params, "k", default)
    if isinstance(value, bool) or int(value) != value or int(value) < lo:
        raise InvalidArgumentError(f"比特数必须是 ≥ {lo} 的整数 k={value}")
    return int(value)


def _check_norm(coeffs: Dict[str, complex]) -> None:
    total = sum(abs(c) ** 2 for c in coeffs.values())
    if abs(total - 1.0) > NORM_TOL:
        names = ",".join(coeffs)
        raise InvalidArgumentError(f"参数 {names} 的模方和必须为 1，实际为 {total:.12g}")


def _check_weights(weights: Dict[str, float]) -> None:
    for name, value in weights.items():
        if value < 0:
            raise InvalidArgumentError(f"权重不能为负 {name}={value}")
    total = sum(weights.values())
    if abs(total - 1.0) > NORM_TOL:
        names = "+".join(weights)
        raise InvalidArgumentError(f"{names} 之和必须为 1，实际为 {total:.12g}")


# ---------------------------------------------------------------------------
# 振幅向量
# ---------------------------------------------------------------------------

def psi_theta(theta: float) -> np.ndarray:
    """cosθ|00⟩ + sinθ|11⟩"""
    vec = np.zeros(4, dtype=np.complex128)
    vec[0] = math.cos(theta)
    vec[3] = math.sin(theta)
    return vec


def ghz_vector(k: int, alpha: complex = 1 / math.sqrt(2), beta: complex = 1 / math.sqrt(2)) -> np.ndarray:
    vec = np.zeros(2 ** k, dtype=np.complex128)
    vec[0] = alpha
    vec[-1] = beta
    return vec


def w_vector(k: int) -> np.ndarray:
    """单激发等权叠加 |W⟩_k"""
    vec = np.zeros(2 ** k, dtype=np.complex128)
    for qubit in range(k):
        vec[1 << (k - 1 - qubit)] = 1.0
    return vec / math.sqrt(k)


def w_prime_vector(k: int) -> np.ndarray:
    """(σx)^{⊗k}|W⟩_k"""
    return w_vector(k)[::-1].copy()


def ansatz_matrix(x: float, y: float, a: float, b: float, gamma: float) -> np.ndarray:
    """两比特 X 型拟设矩阵，不做符号检查"""
    m = np.zeros((4, 4), dtype=np.complex128)
    m[0, 0] = x + gamma / 2
    m[3, 3] = y + gamma / 2
    m[0, 3] = m[3, 0] = gamma / 2
    m[1, 1] = a
    m[2, 2] = b
    return m


def rho_sl_ansatz_params(gamma: float, theta: float) -> Tuple[float, float, float, float, float]:
    """ρ_SL(γ, θ) 在拟设矩阵下的坐标 (x, y, a, b, γ')"""
    big_gamma = gamma * math.sin(2 * theta)
    x = gamma * math.cos(theta) ** 2 - big_gamma / 2
    y = gamma * math.sin(theta) ** 2 - big_gamma / 2
    return x, y, 1.0 - gamma, 0.0, big_gamma


def itot_curve(n: float) -> float:
    """f(𝒩) = −𝒩/2 + √(𝒩 + 5𝒩²/4)，满足 f(𝒩) ≥ 𝒩"""
    return -n / 2 + math.sqrt(n + 1.25 * n * n)


# ---------------------------------------------------------------------------
# 态族
# ---------------------------------------------------------------------------

def _pure_theta(p: Mapping[str, Any]) -> QuantumState:
    theta = _real(p, "theta", 0.0, math.pi / 2)
    return from_amplitudes(psi_theta(theta))


def _ansatz(p: Mapping[str, Any]) -> QuantumState:
    values = {name: _real(p, name) for name in ("x", "y", "a", "b", "gamma")}
    _check_weights(values)
    return QuantumState(k=2, rho=ansatz_matrix(**values))


def _bell_mixture(gamma: float, a: float, b: float) -> QuantumState:
    return QuantumState(k=2, rho=ansatz_matrix(0.0, 0.0, a, b, gamma))


def _rho_m(p: Mapping[str, Any]) -> QuantumState:
    gamma = _real(p, "gamma", 0.0, 1.0)
    return _bell_mixture(gamma, 1.0 - gamma, 0.0)


def _rho_k(p: Mapping[str, Any]) -> QuantumState:
    gamma = _real(p, "gamma", 0.0, 1.0)
    a = (1.0 - gamma) / 2
    return _bell_mixture(gamma, a, a)


def _rho_c(p: Mapping[str, Any]) -> QuantumState:
    values = {name: _real(p, name) for name in ("gamma", "a", "b")}
    _check_weights(values)
    return _bell_mixture(values["gamma"], values["a"], values["b"])


def _rho_sl(p: Mapping[str, Any]) -> QuantumState:
    gamma = _real(p, "gamma", 0.0, 1.0)
    theta = _real(p, "theta", 0.0, math.pi / 2)
    pure = psi_theta(theta)
    rho = gamma * np.outer(pure, pure.conj())
    rho[1, 1] += 1.0 - gamma
    return QuantumState(k=2, rho=rho)


def _rho_itot(p: Mapping[str, Any]) -> QuantumState:
    return make_rho_itot(_real(p, "n"), _real(p, "a", default=0.0))


def _ghz(p: Mapping[str, Any]) -> QuantumState:
    return from_amplitudes(ghz_vector(_qubits(p, 2, default=3)))


def _w(p: Mapping[str, Any]) -> QuantumState:
    return from_amplitudes(w_vector(_qubits(p, 2, default=3)))


def _w_prime(p: Mapping[str, Any]) -> QuantumState:
    return from_amplitudes(w_prime_vector(_qubits(p, 2, default=3)))


def _symmetric(p: Mapping[str, Any]) -> QuantumState:
    t = {name: _complex(p, name) for name in ("t1", "t2", "t3", "t4")}
    _check_norm(t)
    vec = (t["t1"] * ghz_vector(3, 1.0, 0.0) + t["t2"] * w_vector(3)
           + t["t3"] * w_prime_vector(3) + t["t4"] * ghz_vector(3, 0.0, 1.0))
    return from_amplitudes(vec, normalize=True)


def _g_type(p: Mapping[str, Any]) -> QuantumState:
    a = _real(p, "a", 0.0, 1.0)
    return from_amplitudes(ghz_vector(3, math.sqrt(a), math.sqrt(1.0 - a)))


def _j_state(p: Mapping[str, Any]) -> QuantumState:
    b = _real(p, "b", 0.0, 1.0)
    vec = math.sqrt(b) * w_vector(3) + math.sqrt(1.0 - b) * ghz_vector(3, 0.0, 1.0)
    return from_amplitudes(vec)


def _upsilon(p: Mapping[str, Any]) -> QuantumState:
    c = {name: _real(p, name) for name in ("c1", "c2", "c3")}
    _check_norm(c)
    vec = (c["c1"] * ghz_vector(3, 1.0, 0.0) + c["c2"] * w_vector(3)
           + c["c3"] * ghz_vector(3, 0.0, 1.0))
    return from_amplitudes(vec, normalize=True)


def _sparse3(coeffs: Dict[str, complex]) -> QuantumState:
    _check_norm(coeffs)
    vec = np.zeros(8, dtype=np.complex128)
    for name, value in coeffs.items():
        vec[int(name[1:])] = value
    return from_amplitudes(vec, normalize=True)


def _lambda(p: Mapping[str, Any]) -> QuantumState:
    return _sparse3({name: _real(p, name) for name in ("c0", "c1", "c6")})


def _omega(p: Mapping[str, Any]) -> QuantumState:
    return _sparse3({name: _complex(p, name) for name in ("c0", "c1", "c2", "c4")})


def _general3(p: Mapping[str, Any]) -> QuantumState:
    if "amplitudes" in p:
        amps = np.asarray(p["amplitudes"], dtype=np.complex128).reshape(-1)
        if amps.size != 8:
            raise InvalidArgumentError(f"三比特态需要 8 个振幅 amplitudes（实际 {amps.size} 个）")
        coeffs = {f"c{i}": complex(amps[i]) for i in range(8)}
    else:
        coeffs = {f"c{i}": _complex(p, f"c{i}", default=0j) for i in range(8)}
    return _sparse3(coeffs)


def _g_type_k(p: Mapping[str, Any]) -> QuantumState:
    k = _qubits(p, 2)
    coeffs = {"alpha": _complex(p, "alpha"), "beta": _complex(p, "beta")}
    _check_norm(coeffs)
    return from_amplitudes(ghz_vector(k, coeffs["alpha"], coeffs["beta"]), normalize=True)


def _w_k(p: Mapping[str, Any]) -> QuantumState:
    return from_amplitudes(w_vector(_qubits(p, 2)))


def _z_state(p: Mapping[str, Any]) -> QuantumState:
    k = _qubits(p, 2)
    q = _real(p, "q", 0.0, 1.0)
    phi = _real(p, "phi", default=0.0)
    vec = math.sqrt(q) * ghz_vector(k) - np.exp(1j * phi) * math.sqrt(1.0 - q) * w_vector(k)
    return from_amplitudes(vec, normalize=True)


def _pi(p: Mapping[str, Any]) -> QuantumState:
    coeffs = {"alpha": _complex(p, "alpha"), "beta": _complex(p, "beta")}
    _check_norm(coeffs)
    theta0 = _real(p, "theta0", 0.0, math.pi / 2)
    theta1 = _real(p, "theta1", 0.0, math.pi / 2)
    if abs((theta0 - math.pi / 4) * (theta1 - math.pi / 4)) > NORM_TOL:
        raise InvalidArgumentError(
            f"theta0 或 theta1 必须等于 π/4（theta0={theta0}, theta1={theta1}）"
        )
    flipped = kron_all([IDENTITY2, PAULI_X]) @ psi_theta(theta1)
    zero, one = np.array([1, 0], dtype=np.complex128), np.array([0, 1], dtype=np.complex128)
    vec = coeffs["alpha"] * np.kron(zero, psi_theta(theta0)) + coeffs["beta"] * np.kron(one, flipped)
    return from_amplitudes(vec, normalize=True)


def _mu(p: Mapping[str, Any]) -> QuantumState:
    theta = _real(p, "theta", 0.0, math.pi / 2)
    return from_amplitudes(np.kron(psi_theta(theta), np.array([1, 0], dtype=np.complex128)))


_BUILDERS: Dict[FamilyTag, Callable[[Mapping[str, Any]], QuantumState]] = {
    FamilyTag.PURE_THETA: _pure_theta,
    FamilyTag.ANSATZ: _ansatz,
    FamilyTag.RHO_M: _rho_m,
    FamilyTag.RHO_K: _rho_k,
    FamilyTag.RHO_C: _rho_c,
    FamilyTag.RHO_SL: _rho_sl,
    FamilyTag.RHO_ITOT: _rho_itot,
    FamilyTag.GHZ: _ghz,
    FamilyTag.W: _w,
    FamilyTag.W_PRIME: _w_prime,
    FamilyTag.SYMMETRIC: _symmetric,
    FamilyTag.G_TYPE: _g_type,
    FamilyTag.J_STATE: _j_state,
    FamilyTag.UPSILON: _upsilon,
    FamilyTag.LAMBDA: _lambda,
    FamilyTag.OMEGA: _omega,
    FamilyTag.GENERAL3: _general3,
    FamilyTag.G_TYPE_K: _g_type_k,
    FamilyTag.W_K: _w_k,
    FamilyTag.Z_STATE: _z_state,
    FamilyTag.PI: _pi,
    FamilyTag.MU: _mu,
}


def build(family: StateFamily) -> QuantumState:
    """按态族标签与参数构造归一化的量子态"""
    builder = _BUILDERS.get(family.tag)
    if builder is None:
        raise InvalidArgumentError(f"未知的态族 tag={family.tag}")
    return builder(family.params)


def family(tag: str, **params: Any) -> StateFamily:
    """便捷写法：family("RhoM", gamma=0.5)"""
    try:
        parsed = FamilyTag(tag) if not isinstance(tag, FamilyTag) else tag
    except ValueError:
        raise InvalidArgumentError(f"未知的态族 tag={tag}")
    return StateFamily(tag=parsed, params=dict(params))


# ---------------------------------------------------------------------------
# ρ_Itot：沿 𝒞 = f(𝒩) 曲线的拟设态
# ---------------------------------------------------------------------------

def make_rho_itot(n_target: float, a_free: float) -> QuantumState:
    """
    构造 y = 0 的拟设态，使负性为 n_target、并发度为 f(n_target)

    令 γ = f + 2√(ab)、u = √b，负性约束化为
    h(u) = 2𝒩u² − 4f√a·u + (𝒩² + 2𝒩a − f²) = 0，
    可行域 x = 1 − f − (√a + u)² ≥ 0 即 0 ≤ u ≤ √(1−f) − √a。
    """
    if not 0.0 < n_target < 1.0:
        raise InvalidArgumentError(f"n_target 必须在 (0,1) 内 n_target={n_target}")
    if a_free < 0.0:
        raise InvalidArgumentError(f"a_free 不能为负 a_free={a_free}")

    f = itot_curve(n_target)
    sqrt_a = math.sqrt(a_free)
    if f >= 1.0 or sqrt_a > math.sqrt(1.0 - f):
        raise InfeasibleParametersError(
            f"a_free 超出可行范围 a_free={a_free}（需 a ≤ {max(0.0, 1.0 - f):.6g}）"
        )
    u_max = math.sqrt(1.0 - f) - sqrt_a

    def h(u: float) -> float:
        return 2 * n_target * u * u - 4 * f * sqrt_a * u + (n_target ** 2 + 2 * n_target * a_free - f * f)

    lo, hi = 0.0, u_max
    h_lo, h_hi = h(lo), h(hi)
    if h_lo == 0.0:
        root = 0.0
    elif h_lo * h_hi < 0.0:
        root = scipy.optimize.bisect(h, lo, hi, xtol=ITOT_XTOL)
    else:
        vertex = f * sqrt_a / n_target
        if h_lo > 0.0 and vertex <= u_max and h(vertex) <= 0.0:
            root = scipy.optimize.bisect(h, lo, vertex, xtol=ITOT_XTOL)
        else:
            raise InfeasibleParametersError(
                f"在 x ≥ 0 的范围内找不到解 n_target={n_target}, a_free={a_free}"
            )
    logger.debug("ρ_Itot 求根: n=%.6g a=%.6g u=%.12g (u_max=%.6g)", n_target, a_free, root, u_max)

    b = root * root
    gamma = f + 2 * sqrt_a * root
    x = 1.0 - gamma - a_free - b
    if x < 0.0:
        if x < -1e-12:
            raise InfeasibleParametersError(f"求得 x 为负 x={x:.3e}")
        x = 0.0
    return QuantumState(k=2, rho=ansatz_matrix(x, 0.0, a_free, b, gamma))


# ---------------------------------------------------------------------------
# 随机采样与变换
# ---------------------------------------------------------------------------

def random_pure(k: int, rng: np.random.Generator) -> QuantumState:
    """Haar 随机纯态：独立复高斯振幅归一化"""
    if k < 1:
        raise InvalidArgumentError(f"比特数必须 ≥ 1 k={k}")
    d = 2 ** k
    vec = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return from_amplitudes(vec, normalize=True)


def random_mixed2(rng: np.random.Generator) -> QuantumState:
    """Hilbert–Schmidt 随机两比特混态 GG†/tr(GG†)"""
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    return QuantumState(k=2, rho=(rho + rho.conj().T) / 2)


def random_symmetric3(rng: np.random.Generator) -> QuantumState:
    """随机三比特置换对称纯态 |Φ⟩"""
    t = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    t = t / np.linalg.norm(t)
    return build(StateFamily(FamilyTag.SYMMETRIC, {f"t{i + 1}": t[i] for i in range(4)}))


def mix(components: Sequence[Tuple[float, QuantumState]]) -> QuantumState:
    """凸组合 Σ w_i ρ_i"""
    if not components:
        raise InvalidArgumentError("components 不能为空")
    k = components[0][1].k
    total = 0.0
    rho = np.zeros((2 ** k, 2 ** k), dtype=np.complex128)
    for index, (weight, state) in enumerate(components):
        if weight < 0:
            raise InvalidArgumentError(f"权重不能为负 weight[{index}]={weight}")
        if state.k != k:
            raise InvalidArgumentError(f"各分量比特数必须一致 k[{index}]={state.k}（期望 {k}）")
        rho += weight * state.rho
        total += weight
    if abs(total - 1.0) > WEIGHT_TOL:
        raise InvalidArgumentError(f"权重之和必须为 1 sum={total:.15g}")
    if len(components) == 1 and components[0][1].purity_hint:
        return components[0][1]
    return QuantumState(k=k, rho=rho)


def random_local_unitary(k: int, rng: np.random.Generator) -> np.ndarray:
    """k 个独立 Haar 随机单比特幺正的张量积"""
    if k < 1:
        raise InvalidArgumentError(f"比特数必须 ≥ 1 k={k}")
    factors = [unitary_group.rvs(2, random_state=rng) for _ in range(k)]
    return kron_all(factors)


def transform(state: QuantumState, unitary: np.ndarray) -> QuantumState:
    """UρU†，纯态同时变换振幅"""
    u = as_matrix(unitary)
    if u.shape[0] != state.dim:
        raise InvalidShapeError(f"幺正矩阵维度 {u.shape[0]} 与态维度 {state.dim} 不匹配")
    rho = u @ state.rho @ u.conj().T
    amplitudes = None if state.amplitudes is None else u @ state.amplitudes
    return QuantumState(k=state.k, rho=rho, purity_hint=state.purity_hint, amplitudes=amplitudes)


# ---------------------------------------------------------------------------
# JSON 序列化
# ---------------------------------------------------------------------------

def state_to_json(state: QuantumState) -> Dict[str, Any]:
    """{k, rho: [[[re, im], ...], ...]}，按行存放"""
    rows: List[List[List[float]]] = [
        [[float(z.real), float(z.imag)] for z in row] for row in state.rho
    ]
    return {"k": state.k, "rho": rows}


def state_from_json(doc: Mapping[str, Any]) -> QuantumState:
    try:
        k = int(doc["k"])
        entries = np.asarray(doc["rho"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidArgumentError(f"无效的态文档: {exc}")
    d = 2 ** k
    if entries.shape != (d, d, 2):
        raise InvalidShapeError(f"rho 的形状应为 ({d}, {d}, 2)，实际为 {entries.shape}")
    state = from_density_matrix(entries[..., 0] + 1j * entries[..., 1])
    if state.k != k:
        raise InvalidShapeError(f"k={k} 与矩阵维度不符")
    return state

