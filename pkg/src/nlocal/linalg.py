"""Dense complex tensor algebra for multi-qubit registers.

State vectors and operators are plain numpy arrays. Qubit 0 is the most
significant bit of the computational-basis index, so ``tensor_product(a, b)``
places ``a`` on the high-order qubits; every module in this package
inherits that convention.
"""

from __future__ import annotations

import numpy as np

#: Default absolute tolerance for floating-point comparisons.
ATOL = 1e-9

IDENTITY_2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
#: Pauli vector (sigma_x, sigma_y, sigma_z), indexable by axis 0.
PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])

for _m in (IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z, PAULI):
    _m.setflags(write=False)
del _m


def tensor_product(*operands: np.ndarray) -> np.ndarray:
    """Kronecker product of vectors or matrices, first operand most significant."""
    if not operands:
        raise ValueError("tensor_product needs at least one operand")
    out = np.asarray(operands[0], dtype=complex)
    for op in operands[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def conjugate_transpose(m: np.ndarray) -> np.ndarray:
    """Hermitian adjoint of a matrix."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValueError("conjugate_transpose expects a matrix")
    return m.conj().T


def projector(v: np.ndarray) -> np.ndarray:
    """Rank-1 projector |v><v| of a normalized state vector."""
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1:
        raise ValueError("projector expects a 1-D state vector")
    if abs(np.linalg.norm(v) - 1.0) > ATOL:
        raise ValueError("state vector is not normalized")
    return np.outer(v, v.conj())


def expectation(rho: np.ndarray, op: np.ndarray) -> complex:
    """Tr(rho @ op), computed without forming the product matrix."""
    rho = np.asarray(rho, dtype=complex)
    op = np.asarray(op, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("expectation expects square matrices")
    if rho.shape != op.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {op.shape}")
    return complex(np.einsum("ij,ji->", rho, op))


def basis_ket(index: int, n_qubits: int) -> np.ndarray:
    """Computational-basis ket |index> on an n-qubit register."""
    if not 0 <= index < 2**n_qubits:
        raise ValueError(f"basis index {index} out of range for {n_qubits} qubits")
    v = np.zeros(2**n_qubits, dtype=complex)
    v[index] = 1.0
    return v


def num_qubits(dim: int) -> int:
    """Qubit count for a power-of-two dimension; raises otherwise."""
    n = int(dim).bit_length() - 1
    if dim <= 0 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def as_density_matrix(state: np.ndarray) -> np.ndarray:
    """Promote a ket to |v><v|; pass density matrices through."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return projector(state)
    if state.ndim == 2:
        return state
    raise ValueError("expected a state vector or a density matrix")


def is_state_vector(v: np.ndarray, atol: float = ATOL) -> bool:
    """True for a 1-D unit-norm complex vector of power-of-two length."""
    v = np.asarray(v)
    if v.ndim != 1:
        return False
    try:
        num_qubits(v.shape[0])
    except ValueError:
        return False
    return abs(np.linalg.norm(v) - 1.0) <= atol


def is_density_matrix(m: np.ndarray, atol: float = ATOL) -> bool:
    """Hermitian, unit trace, positive semidefinite within ``atol``."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    if np.max(np.abs(m - m.conj().T)) >= atol:
        return False
    if abs(np.trace(m).real - 1.0) > atol or abs(np.trace(m).imag) > atol:
        return False
    return float(np.linalg.eigvalsh(m).min()) > -atol


def is_projector(m: np.ndarray, atol: float = ATOL) -> bool:
    """Idempotent and Hermitian within ``atol``."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    if np.max(np.abs(m - m.conj().T)) >= atol:
        return False
    return np.max(np.abs(m @ m - m)) < atol
