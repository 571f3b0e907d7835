"""
线性代数内核 - 厄米本征分解、克罗内克积、部分转置、部分迹与迹范数

约定：比特 0 是最左边（最高位）的张量因子。
"""

import logging
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .data_models import EigenSystem
from .errors import InvalidArgumentError, InvalidShapeError

logger = logging.getLogger(__name__)

# 厄米性判据：max|A − A†| ≤ HERMITIAN_RTOL · max|A|
HERMITIAN_RTOL = 1e-12

IDENTITY2 = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


def as_matrix(a) -> np.ndarray:
    """转换为复方阵，维度不对时报错"""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise InvalidShapeError(f"需要非空方阵，实际形状 shape={m.shape}")
    return m


def qubit_count(dim: int) -> int:
    """由维度 2^k 求比特数 k"""
    if dim <= 0 or dim & (dim - 1):
        raise InvalidShapeError(f"维度必须是 2 的幂 dim={dim}")
    return dim.bit_length() - 1


def _check_qubit_operator(rho: np.ndarray, k: int) -> np.ndarray:
    m = as_matrix(rho)
    if k < 1 or m.shape[0] != 2 ** k:
        raise InvalidShapeError(f"矩阵维度 {m.shape[0]} 与比特数 k={k} 不匹配")
    return m


def _check_index(qubit: int, k: int, name: str = "qubit") -> int:
    if not isinstance(qubit, (int, np.integer)) or not 0 <= qubit < k:
        raise InvalidArgumentError(f"比特下标越界 {name}={qubit}（k={k}）")
    return int(qubit)


def kron(a, b) -> np.ndarray:
    """标准克罗内克积"""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def kron_all(ops: Sequence) -> np.ndarray:
    """依次求多个算符（或向量）的克罗内克积"""
    if not ops:
        raise InvalidArgumentError("kron_all 需要至少一个因子")
    return reduce(kron, ops)


def embed(op, qubit: int, k: int) -> np.ndarray:
    """把单比特算符嵌入到 k 比特空间的第 qubit 个因子"""
    _check_index(qubit, k)
    left = np.eye(2 ** qubit, dtype=np.complex128)
    right = np.eye(2 ** (k - qubit - 1), dtype=np.complex128)
    return kron_all([left, op, right])


def partial_transpose(rho, qubit: int, k: int) -> np.ndarray:
    """只对第 qubit 个张量因子的指标做转置"""
    m = _check_qubit_operator(rho, k)
    qubit = _check_index(qubit, k)
    t = m.reshape([2] * (2 * k))
    t = np.swapaxes(t, qubit, k + qubit)
    return np.ascontiguousarray(t.reshape(2 ** k, 2 ** k))


def partial_trace(rho, keep: Iterable[int], k: int) -> np.ndarray:
    """对不在 keep 中的比特求迹，保留比特按升序排列"""
    m = _check_qubit_operator(rho, k)
    kept = sorted(set(int(q) for q in keep))
    if not kept:
        raise InvalidArgumentError("keep 不能为空")
    for q in kept:
        _check_index(q, k, name="keep")
    traced = [q for q in range(k) if q not in kept]
    t = m.reshape([2] * (2 * k))
    current = k
    for q in reversed(traced):
        t = np.trace(t, axis1=q, axis2=current + q)
        current -= 1
    d = 2 ** len(kept)
    return t.reshape(d, d)


def apply_local(rho, op, qubit: int, k: int) -> np.ndarray:
    """计算 O_q ρ O_q†，O 只作用在第 qubit 个比特上"""
    m = _check_qubit_operator(rho, k)
    qubit = _check_index(qubit, k)
    op = np.asarray(op, dtype=np.complex128)
    t = m.reshape([2] * (2 * k))
    t = np.moveaxis(np.tensordot(op, t, axes=([1], [qubit])), 0, qubit)
    t = np.moveaxis(np.tensordot(t, op.conj(), axes=([k + qubit], [1])), -1, k + qubit)
    return t.reshape(2 ** k, 2 ** k)


def replace_with_identity(rho, qubit: int, k: int) -> np.ndarray:
    """(I/2)_qubit ⊗ tr_qubit(ρ)：把第 qubit 个比特换成最大混态"""
    m = _check_qubit_operator(rho, k)
    qubit = _check_index(qubit, k)
    if k == 1:
        return np.trace(m) * IDENTITY2 / 2
    rest = [q for q in range(k) if q != qubit]
    reduced = partial_trace(m, rest, k).reshape([2] * (2 * (k - 1)))
    full = np.multiply.outer(reduced, IDENTITY2 / 2)
    full = np.moveaxis(full, [2 * (k - 1), 2 * (k - 1) + 1], [qubit, k + qubit])
    return full.reshape(2 ** k, 2 ** k)


def is_hermitian(a, rtol: float = HERMITIAN_RTOL) -> bool:
    m = as_matrix(a)
    scale = float(np.max(np.abs(m)))
    return float(np.max(np.abs(m - m.conj().T))) <= rtol * scale


def _require_hermitian(a) -> np.ndarray:
    m = as_matrix(a)
    if not is_hermitian(m):
        deviation = float(np.max(np.abs(m - m.conj().T)))
        raise InvalidArgumentError(f"输入不是厄米矩阵 max|A−A†|={deviation:.3e}")
    return m


def hermitian_eigendecompose(a) -> EigenSystem:
    """厄米矩阵的完整本征分解；简并子空间返回任意一组正交基"""
    m = _require_hermitian(a)
    values, vectors = scipy.linalg.eigh((m + m.conj().T) / 2)
    return EigenSystem(values=np.asarray(values, dtype=float), vectors=vectors)


def hermitian_eigenvalues(a) -> np.ndarray:
    m = _require_hermitian(a)
    return np.asarray(scipy.linalg.eigvalsh((m + m.conj().T) / 2), dtype=float)


def trace_norm(a) -> float:
    """迹范数：厄米矩阵本征值绝对值之和"""
    return float(np.sum(np.abs(hermitian_eigenvalues(a))))


def project(a, basis: np.ndarray) -> np.ndarray:
    """子空间上的矩阵元 ⟨v_m|A|v_n⟩，basis 按列存放"""
    return basis.conj().T @ as_matrix(a) @ basis


def bit_of(index: int, qubit: int, k: int) -> int:
    return (index >> (k - 1 - qubit)) & 1


def basis_index(bits: Sequence[int]) -> int:
    """比特串（比特 0 在最左）对应的计算基下标"""
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def z_signs(qubit: int, k: int) -> np.ndarray:
    """Z_qubit 的对角元"""
    idx = np.arange(2 ** k)
    return 1.0 - 2.0 * ((idx >> (k - 1 - qubit)) & 1)
