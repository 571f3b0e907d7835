"""
纠缠与关联度量 - 负性、并发度、线性熵、互信息与三比特局域幺正不变量
"""

import math
from typing import Dict, Iterable, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from .data_models import InvariantSet, QuantumState
from .errors import InvalidArgumentError
from .linalg import (
    PAULI_Y,
    as_matrix,
    hermitian_eigendecompose,
    hermitian_eigenvalues,
    partial_trace,
    partial_transpose,
)

# 熵计算中把 [−ENTROPY_CLIP, 0) 内的本征值视为 0
ENTROPY_CLIP = 1e-12

_YY = np.real(np.kron(PAULI_Y, PAULI_Y))


def _check_qubit(state: QuantumState, qubit: int) -> int:
    if not isinstance(qubit, (int, np.integer)) or not 0 <= qubit < state.k:
        raise InvalidArgumentError(f"比特下标越界 qubit={qubit}（k={state.k}）")
    return int(qubit)


def _check_partition(state: QuantumState, partition: Iterable[int]) -> Tuple[int, ...]:
    part = tuple(sorted(set(int(q) for q in partition)))
    if not part or len(part) >= state.k:
        raise InvalidArgumentError(f"二分划必须非平凡 partition={part}（k={state.k}）")
    for q in part:
        if not 0 <= q < state.k:
            raise InvalidArgumentError(f"二分划包含越界比特 partition={part}")
    return part


def _require_pure(state: QuantumState, what: str) -> None:
    if not state.purity_hint:
        raise InvalidArgumentError(f"{what} 只适用于纯态（purity_hint 未设置）")


def negativity(state: QuantumState, qubit: int = 0) -> float:
    """𝒩 = 2Σ|λ_j|，λ_j 为 ρ^{T_qubit} 的负本征值"""
    qubit = _check_qubit(state, qubit)
    values = hermitian_eigenvalues(partial_transpose(state.rho, qubit, state.k))
    return float(2.0 * -np.sum(values[values < 0]))


def schmidt_coefficients(state: QuantumState, partition: Iterable[int]) -> np.ndarray:
    part = _check_partition(state, partition)
    vec = state.amplitudes
    if vec is None:
        raise InvalidArgumentError("纯态缺少振幅 amplitudes")
    rest = tuple(q for q in range(state.k) if q not in part)
    tensor = np.transpose(vec.reshape([2] * state.k), part + rest)
    return scipy.linalg.svdvals(tensor.reshape(2 ** len(part), 2 ** len(rest)))


def negativity_pure_schmidt(state: QuantumState, partition: Iterable[int]) -> float:
    """纯态负性 (Σa_i)² − 1，a_i 为 Schmidt 系数"""
    _require_pure(state, "negativity_pure_schmidt")
    a = schmidt_coefficients(state, partition)
    return float(np.sum(a) ** 2 - 1.0)


def _sqrt_psd(rho: np.ndarray) -> np.ndarray:
    system = hermitian_eigendecompose(rho)
    roots = np.sqrt(np.clip(system.values, 0.0, None))
    return (system.vectors * roots) @ system.vectors.conj().T


def concurrence_of_matrix(rho) -> float:
    """
    Wootters 并发度 max{0, λ1−λ2−λ3−λ4}

    λ_i 取 √ρ·√ρ̃ 的奇异值（即 R = ρρ̃ 本征值的平方根），
    ρ̃ = (σy⊗σy)ρ*(σy⊗σy)。
    """
    m = as_matrix(rho)
    if m.shape != (4, 4):
        raise InvalidArgumentError(f"并发度只定义在两比特态上 dim={m.shape[0]}")
    root = _sqrt_psd(m)
    root_tilde = _YY @ root.conj() @ _YY
    lam = scipy.linalg.svdvals(root @ root_tilde)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence2(state: QuantumState) -> float:
    if state.k != 2:
        raise InvalidArgumentError(f"concurrence2 需要两比特态 k={state.k}")
    return concurrence_of_matrix(state.rho)


def pure_bipartite_concurrence(state: QuantumState, partition: Iterable[int]) -> float:
    """纯态并发度 √(2(1 − tr ρ_A²))"""
    _require_pure(state, "pure_bipartite_concurrence")
    part = _check_partition(state, partition)
    reduced = partial_trace(state.rho, part, state.k)
    purity = float(np.real(np.trace(reduced @ reduced)))
    return math.sqrt(max(0.0, 2.0 * (1.0 - purity)))


def linear_entropy(state: QuantumState) -> float:
    """S_L = (4/3)(1 − tr ρ²)，两比特约定"""
    if state.k != 2:
        raise InvalidArgumentError(f"linear_entropy 需要两比特态 k={state.k}")
    purity = float(np.real(np.trace(state.rho @ state.rho)))
    return 4.0 / 3.0 * (1.0 - purity)


def von_neumann_entropy(target: Union[QuantumState, np.ndarray]) -> float:
    """S = −tr(ρ ln ρ)，0·ln0 = 0"""
    rho = target.rho if isinstance(target, QuantumState) else as_matrix(target)
    values = hermitian_eigenvalues(rho)
    values = values[values > ENTROPY_CLIP]
    return float(-np.sum(values * np.log(values)))


def mutual_information(state: QuantumState, partition: Iterable[int]) -> float:
    """I_tot = S(ρ_A) + S(ρ_B) − S(ρ)"""
    part = _check_partition(state, partition)
    rest = tuple(q for q in range(state.k) if q not in part)
    s_a = von_neumann_entropy(partial_trace(state.rho, part, state.k))
    s_b = von_neumann_entropy(partial_trace(state.rho, rest, state.k))
    return max(0.0, s_a + s_b - von_neumann_entropy(state.rho))


def invariant_i4(state: QuantumState, pair: Sequence[int] = (1, 2)) -> float:
    """I₄ = 3tr[(ρ_i⊗ρ_j)ρ_ij] − tr ρ_i³ − tr ρ_j³"""
    i, j = sorted(int(q) for q in pair)
    if i == j or not (0 <= i < 3 and 0 <= j < 3):
        raise InvalidArgumentError(f"I4 需要两个不同的比特 pair={tuple(pair)}")
    rho_i = partial_trace(state.rho, [i], 3)
    rho_j = partial_trace(state.rho, [j], 3)
    rho_ij = partial_trace(state.rho, [i, j], 3)
    cross = np.trace(np.kron(rho_i, rho_j) @ rho_ij)
    cubes = np.trace(rho_i @ rho_i @ rho_i) + np.trace(rho_j @ rho_j @ rho_j)
    return float(np.real(3.0 * cross - cubes))


def pair_concurrences(state: QuantumState) -> Dict[Tuple[int, int], float]:
    """三比特态各两比特约化态的并发度"""
    return {
        pair: concurrence_of_matrix(partial_trace(state.rho, pair, 3))
        for pair in ((0, 1), (0, 2), (1, 2))
    }


def invariants3(state: QuantumState, pair: Sequence[int] = (1, 2)) -> InvariantSet:
    """三比特纯态的五个局域幺正不变量及相关量"""
    if state.k != 3:
        raise InvalidArgumentError(f"invariants3 需要三比特态 k={state.k}")
    _require_pure(state, "invariants3")

    purities = []
    for qubit in range(3):
        reduced = partial_trace(state.rho, [qubit], 3)
        purities.append(float(np.real(np.trace(reduced @ reduced))))
    n1, n2, n3 = (negativity(state, q) for q in range(3))
    conc = pair_concurrences(state)
    c12, c13, c23 = conc[(0, 1)], conc[(0, 2)], conc[(1, 2)]

    i1, i2, i3 = purities
    i4 = invariant_i4(state, pair)
    tau = abs(n1 ** 2 - c12 ** 2 - c13 ** 2)
    theta = (i2 - i3) ** 2 - tau ** 2 / 4
    m = (5.0 - 3.0 * i1 - 3.0 * i2 - 3.0 * i3 + 4.0 * i4) / 3.0
    return InvariantSet(
        I1=i1, I2=i2, I3=i3, I4=i4, I5=tau ** 2, tau=tau,
        N1=n1, N2=n2, N3=n3, C12=c12, C13=c13, C23=c23,
        Theta=theta, M=m,
    )


def negativity_min_for_concurrence(c: float) -> float:
    """给定并发度时的最小负性 √(𝒞² + (1−𝒞)²) + 𝒞 − 1"""
    return math.sqrt(c * c + (1.0 - c) ** 2) + c - 1.0


# 态族的解析不变量

def g_type_invariants(a: float) -> Dict[str, float]:
    return {
        "N": 2.0 * math.sqrt(a * (1.0 - a)),
        "tau": 4.0 * a * (1.0 - a),
        "I4": 1.0 - 3.0 * a + 3.0 * a * a,
    }


def j_state_invariants(b: float) -> Dict[str, float]:
    return {
        "N": 2.0 / 3.0 * math.sqrt(2.0) * math.sqrt(b * (3.0 - 2.0 * b)),
        "tau": 16.0 * math.sqrt(1.0 - b) * b ** 1.5 / (3.0 * math.sqrt(3.0)),
        "I4": 1.0 - 3.0 * b + 4.0 * b * b - 16.0 * b ** 3 / 9.0,
    }


def upsilon_invariants(c1: float, c2: float, c3: float) -> Dict[str, float]:
    return {
        "N": 2.0 / 3.0 * math.sqrt(2 * c2 ** 4 + 9 * c1 ** 2 * c3 ** 2 + 6 * c2 ** 2 * c3 ** 2),
        "tau": 4.0 / 9.0 * abs(c3 * (4 * math.sqrt(3.0) * c2 ** 3 + 9 * c1 ** 2 * c3)),
    }


def z_state_negativity(k: int, q: float) -> float:
    """|Z(q,φ)⟩_k 的负性，与 φ 无关"""
    inner = (-k * k + 6 * k - 4) * q * q + 2 * (k * k - 5 * k + 4) * q + 4 * (k - 1)
    return math.sqrt(inner) / k


def w_k_negativity(k: int) -> float:
    return 2.0 * math.sqrt(k - 1) / k
