from typing import Optional, Tuple

import numpy as np
from scipy import linalg


def basis_vector(index: int, d: int) -> np.ndarray:
    """计算基矢 |index⟩"""
    vec = np.zeros(d, dtype=complex)
    vec[index] = 1.0
    return vec


def product_amplitudes(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """|a⟩⊗|b⟩，|i,k⟩ 对应下标 i·d + k"""
    return np.kron(a, b)


def to_tensor(matrix: np.ndarray, d: int) -> np.ndarray:
    """把 d²×d² 矩阵展开为 [i,k,j,l] = ⟨i,k|M|j,l⟩"""
    return matrix.reshape(d, d, d, d)


def partial_transpose_matrix(matrix: np.ndarray, d: int) -> np.ndarray:
    """对子系统B做部分转置：⟨i,l|out|j,k⟩ = ⟨i,k|in|j,l⟩"""
    return to_tensor(matrix, d).transpose(0, 3, 2, 1).reshape(d * d, d * d)


def hermitian_asymmetry(matrix: np.ndarray) -> float:
    """矩阵与其共轭转置的最大偏差"""
    return float(np.max(np.abs(matrix - matrix.conj().T)))


def hermitian_eigvalsh(matrix: np.ndarray) -> np.ndarray:
    """稠密厄米对角化，返回升序本征值"""
    return linalg.eigvalsh(matrix)


def expectation_value(matrix: np.ndarray, vector: np.ndarray) -> float:
    """⟨v|M|v⟩ 的实部"""
    return float(np.real(np.vdot(vector, matrix @ vector)))


def random_ket(rng: np.random.Generator, d: int) -> np.ndarray:
    """独立复高斯分量归一化得到的Haar随机态"""
    vec = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return vec / np.linalg.norm(vec)


def random_kets(rng: np.random.Generator, count: int, d: int) -> np.ndarray:
    """批量生成Haar随机态，形状 (count, d)"""
    vecs = rng.standard_normal((count, d)) + 1j * rng.standard_normal((count, d))
    return vecs / np.linalg.norm(vecs, axis=1, keepdims=True)


def contract_with_b(matrix: np.ndarray, d: int, b: np.ndarray) -> np.ndarray:
    """(1⊗⟨b|) M (1⊗|b⟩)，作用在子系统A上的 d×d 矩阵"""
    return np.einsum("k,ikjl,l->ij", b.conj(), to_tensor(matrix, d), b)


def contract_with_a(matrix: np.ndarray, d: int, a: np.ndarray) -> np.ndarray:
    """(⟨a|⊗1) M (|a⟩⊗1)，作用在子系统B上的 d×d 矩阵"""
    return np.einsum("i,ikjl,j->kl", a.conj(), to_tensor(matrix, d), a)


def principal_eigenvector(
    matrix: np.ndarray,
    current: Optional[np.ndarray] = None,
    gap: float = 1e-12
) -> Tuple[float, np.ndarray, bool]:
    """最大本征值及本征向量；简并时取当前向量在本征子空间上的投影"""
    values, vectors = linalg.eigh(matrix)
    top = values[-1]
    mask = values > top - gap
    degenerate = int(mask.sum()) > 1

    if degenerate and current is not None:
        space = vectors[:, mask]
        projected = space @ (space.conj().T @ current)
        norm = np.linalg.norm(projected)
        if norm > 1e-8:
            return float(top), projected / norm, True

    return float(top), vectors[:, -1], degenerate


def frobenius_distance(left: np.ndarray, right: np.ndarray) -> float:
    """Frobenius范数距离"""
    return float(np.linalg.norm(left - right))
