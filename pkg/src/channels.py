"""
局域噪声信道 - 有限时间的退极化/退相位映射及其 t = 0 生成元
"""

import math
from typing import List

import numpy as np

from .data_models import ChannelKind, QuantumState
from .errors import InvalidArgumentError
from .linalg import IDENTITY2, PAULI_Z, PAULIS, apply_local, replace_with_identity, z_signs


def noise_parameters(t: float) -> tuple:
    """(s, p, p′)：s = e^{−t}，p = 1 − s，p′ = 3p/4"""
    if t < 0 or not math.isfinite(t):
        raise InvalidArgumentError(f"时间必须是非负有限数 t={t}")
    s = math.exp(-t)
    p = -math.expm1(-t)
    return s, p, 0.75 * p


def kraus_operators(t: float, kind: ChannelKind) -> List[np.ndarray]:
    """单比特 Kraus 算符"""
    kind = ChannelKind.parse(kind)
    _, p, p_prime = noise_parameters(t)
    if kind is ChannelKind.DEPOLARIZING:
        ops = [math.sqrt(1.0 - p_prime) * IDENTITY2]
        ops.extend(math.sqrt(p_prime / 3.0) * sigma for sigma in PAULIS)
        return ops
    return [math.sqrt(1.0 - p / 2) * IDENTITY2, math.sqrt(p / 2) * PAULI_Z]


def apply_channel(state: QuantumState, t: float, kind: ChannelKind) -> QuantumState:
    """对每个比特独立作用同一局域信道"""
    ops = kraus_operators(t, kind)
    rho = state.rho
    if t > 0:
        for qubit in range(state.k):
            rho = sum(apply_local(rho, op, qubit, state.k) for op in ops)
    return QuantumState(k=state.k, rho=rho, purity_hint=state.purity_hint and t == 0,
                        amplitudes=state.amplitudes if t == 0 else None)


def generator(state: QuantumState, kind: ChannelKind) -> np.ndarray:
    """
    σ = dρ/dt 在 t = 0 的精确值

    退极化: σ = Σ_i [(I/2)_i ⊗ tr_i ρ − ρ]
    退相位: σ = Σ_i ½(Z_i ρ Z_i − ρ)
    """
    kind = ChannelKind.parse(kind)
    rho, k = state.rho, state.k
    sigma = np.zeros_like(rho, dtype=np.complex128)
    if kind is ChannelKind.DEPOLARIZING:
        for qubit in range(k):
            sigma += replace_with_identity(rho, qubit, k) - rho
    else:
        for qubit in range(k):
            d = z_signs(qubit, k)
            sigma += 0.5 * (np.outer(d, d) * rho - rho)
    return (sigma + sigma.conj().T) / 2
