"""Constructors and analyzers for the state families used throughout the package.

Two-qubit pure states are parameterized by a single Schmidt coefficient,
three-qubit states by the generalized-GHZ angle, the two W angles, or a
biseparable cut with pair/single-qubit amplitudes. ``correlation_tensor``
extracts the 3x3 Pauli correlation matrix of a two-qubit density matrix
together with its sorted singular values, which drive the CHSH and
network violation bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg

#: Valid biseparable cut tags: which pair of qubits carries the entanglement.
CUTS = ("12|3", "13|2", "23|1")


def pure_schmidt(gamma0: float) -> np.ndarray:
    """Two-qubit pure state gamma0|00> + sqrt(1-gamma0^2)|11>."""
    if not 0.0 <= gamma0 <= 1.0:
        raise ValueError(f"Schmidt coefficient must lie in [0, 1], got {gamma0}")
    gamma1 = math.sqrt(1.0 - gamma0 * gamma0)
    v = np.zeros(4, dtype=complex)
    v[0] = gamma0
    v[3] = gamma1
    return v


def gghz(beta: float) -> np.ndarray:
    """Generalized GHZ state cos(beta)|000> + sin(beta)|111>, beta in [0, pi/4]."""
    if not 0.0 <= beta <= math.pi / 4:
        raise ValueError(f"GGHZ angle must lie in [0, pi/4], got {beta}")
    v = np.zeros(8, dtype=complex)
    v[0] = math.cos(beta)
    v[7] = math.sin(beta)
    return v


def w_state(omega1: float, omega2: float) -> np.ndarray:
    """W-family state cos(w2)sin(w1)|001> + sin(w2)sin(w1)|010> + cos(w1)|100>.

    The angles are accepted as arbitrary finite reals: the family is
    normalized for any pair, and the reference violation instances use
    omega2 ~ pi/2.
    """
    if not (math.isfinite(omega1) and math.isfinite(omega2)):
        raise ValueError("W-state angles must be finite")
    v = np.zeros(8, dtype=complex)
    v[0b001] = math.cos(omega2) * math.sin(omega1)
    v[0b010] = math.sin(omega2) * math.sin(omega1)
    v[0b100] = math.cos(omega1)
    return v


def biseparable(cut: str, c0: float, v0: float) -> np.ndarray:
    """Three-qubit state with an entangled pair on ``cut`` and a product third qubit.

    The pair is c0|00> + sqrt(1-c0^2)|11| on the cut's two qubits; the
    remaining qubit is v0|0> + sqrt(1-v0^2)|1>. Qubits are ordered 1,2,3.
    """
    if cut not in CUTS:
        raise ValueError(f"unknown cut {cut!r}; expected one of {CUTS}")
    if not 0.0 <= c0 <= 1.0:
        raise ValueError(f"pair amplitude must lie in [0, 1], got {c0}")
    if not 0.0 <= v0 <= 1.0:
        raise ValueError(f"single-qubit amplitude must lie in [0, 1], got {v0}")
    pair = pure_schmidt(c0)
    single = np.array([v0, math.sqrt(1.0 - v0 * v0)], dtype=complex)
    if cut == "12|3":
        return linalg.tensor_product(pair, single)
    if cut == "23|1":
        return linalg.tensor_product(single, pair)
    # 13|2: pair lives on qubits (1, 3); build on axes (q1, q3, q2), then swap.
    v = linalg.tensor_product(pair, single).reshape(2, 2, 2)
    return np.ascontiguousarray(v.transpose(0, 2, 1)).reshape(8)


def product3(amplitude_pairs) -> np.ndarray:
    """Tripartite product state from three single-qubit amplitude pairs."""
    pairs = [np.asarray(p, dtype=complex) for p in amplitude_pairs]
    if len(pairs) != 3:
        raise ValueError(f"expected three amplitude pairs, got {len(pairs)}")
    for p in pairs:
        if p.shape != (2,):
            raise ValueError("each factor must be a pair of amplitudes")
        if abs(np.linalg.norm(p) - 1.0) > linalg.ATOL:
            raise ValueError("amplitude pair is not normalized")
    return linalg.tensor_product(*pairs)


def nghz(n: int) -> np.ndarray:
    """n-qubit GHZ state (|0...0> + |1...1>)/sqrt(2) for 2 <= n <= 4."""
    if not 2 <= n <= 4:
        raise ValueError(f"GHZ register size must be 2..4, got {n}")
    v = np.zeros(2**n, dtype=complex)
    v[0] = v[-1] = 1.0 / math.sqrt(2.0)
    return v


def werner(v: float) -> np.ndarray:
    """Werner state v|psi-><psi-| + (1-v) I/4."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"Werner visibility must lie in [0, 1], got {v}")
    psi_minus = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2.0)
    return v * linalg.projector(psi_minus) + (1.0 - v) * np.eye(4, dtype=complex) / 4.0


def bell_diagonal(weights) -> np.ndarray:
    """Mixture of the four Bell projectors with the given simplex weights."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (4,) or np.any(w < -linalg.ATOL) or abs(w.sum() - 1.0) > linalg.ATOL:
        raise ValueError("weights must be four nonnegative numbers summing to 1")
    s = 1.0 / math.sqrt(2.0)
    kets = np.array(
        [[s, 0, 0, s], [s, 0, 0, -s], [0, s, s, 0], [0, s, -s, 0]], dtype=complex
    )
    return sum(wi * np.outer(k, k.conj()) for wi, k in zip(w, kets))


def random_two_qubit_dm(rng: np.random.Generator) -> np.ndarray:
    """Full-rank random density matrix: normalized G @ G.conj().T, G complex Gaussian."""
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    m = g @ g.conj().T
    return m / np.trace(m).real


@dataclass(frozen=True)
class CorrelationTensor:
    """Pauli correlation matrix t_ij = Tr[rho sigma_i x sigma_j] and its singular values."""

    t: np.ndarray
    lambdas: tuple[float, float, float]

    def __post_init__(self):
        self.t.setflags(write=False)


def correlation_tensor(rho: np.ndarray) -> CorrelationTensor:
    """Correlation tensor of a two-qubit density matrix, singular values sorted descending."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4) or not linalg.is_density_matrix(rho):
        raise ValueError("correlation_tensor expects a valid two-qubit density matrix")
    t = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            op = linalg.tensor_product(linalg.PAULI[i], linalg.PAULI[j])
            t[i, j] = linalg.expectation(rho, op).real
    # Singular values via the symmetric eigenproblem of t^T t; t is only 3x3.
    eigs = np.linalg.eigvalsh(t.T @ t)
    lam = np.sqrt(np.clip(eigs, 0.0, None))[::-1]
    return CorrelationTensor(t=t, lambdas=(float(lam[0]), float(lam[1]), float(lam[2])))
