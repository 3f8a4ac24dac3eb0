"""Measurement bases with bit-string outcome labels.

Three kinds are provided: arbitrary single-qubit projective measurements
(two outcomes, label 0 for the +1 eigenvalue), the complete Bell basis
(four outcomes), and n-qubit GHZ bases (2^n outcomes). Outcome labels are
MSB-first bit strings, and a basis's position-k vector always carries the
label ``format(k, "0{arity}b")`` so downstream probability tables can
index outcomes by integer.

Label conventions:

* Bell: first bit 0/1 separates phi/psi (the zz-parity), second bit
  separates +/- (the xx-parity): phi+ -> 00, phi- -> 01, psi+ -> 10,
  psi- -> 11.
* GHZ: label (m, n_1, ..., n_{k-1}) for the vector
  2^{-1/2} sum_r (-1)^{m r} |r, r^n_1, ..., r^n_{k-1}>, with ^ the XOR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import linalg


@dataclass(frozen=True)
class Direction:
    """Measurement direction on the Bloch sphere (radians).

    Canonical ranges are theta in [0, pi] and phi in [0, 2 pi); arbitrary
    finite angles are accepted and interpreted through sin/cos.
    """

    theta: float
    phi: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise ValueError("direction angles must be finite")

    def bloch(self) -> np.ndarray:
        """Unit Bloch vector (sin t cos p, sin t sin p, cos t)."""
        st = math.sin(self.theta)
        return np.array(
            [st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)]
        )


@dataclass(frozen=True)
class LabeledBasis:
    """Orthonormal measurement basis with bit-string outcome labels.

    ``vectors[k]`` is the state projected onto by outcome ``labels[k]``;
    ``arity`` is the number of qubits measured jointly.
    """

    vectors: np.ndarray
    labels: tuple[str, ...]
    arity: int

    def __post_init__(self):
        self.vectors.setflags(write=False)
        dim = 2**self.arity
        if self.vectors.shape != (dim, dim):
            raise ValueError(f"expected {dim} vectors of dimension {dim}")
        if len(self.labels) != dim or len(set(self.labels)) != dim:
            raise ValueError("labels must be distinct, one per outcome")
        if any(len(lab) != self.arity for lab in self.labels):
            raise ValueError(f"labels must have length {self.arity}")

    @cached_property
    def projectors(self) -> tuple[np.ndarray, ...]:
        return tuple(linalg.projector(v) for v in self.vectors)

    def amplitude_matrix(self) -> np.ndarray:
        """Matrix with rows <label_k|; maps a state to its outcome amplitudes."""
        return self.vectors.conj()


def qubit_basis(d: Direction) -> LabeledBasis:
    """Projective measurement along ``d``: label 0 for the +1 eigenstate of n.sigma."""
    half = d.theta / 2.0
    phase = complex(math.cos(d.phi), math.sin(d.phi))
    plus = np.array([math.cos(half), phase * math.sin(half)], dtype=complex)
    minus = np.array([math.sin(half), -phase * math.cos(half)], dtype=complex)
    return LabeledBasis(vectors=np.stack([plus, minus]), labels=("0", "1"), arity=1)


def bell_basis() -> LabeledBasis:
    """Complete Bell basis: phi+ -> 00, phi- -> 01, psi+ -> 10, psi- -> 11."""
    s = 1.0 / math.sqrt(2.0)
    vectors = np.array(
        [
            [s, 0, 0, s],
            [s, 0, 0, -s],
            [0, s, s, 0],
            [0, s, -s, 0],
        ],
        dtype=complex,
    )
    return LabeledBasis(vectors=vectors, labels=("00", "01", "10", "11"), arity=2)


def ghz_basis(n: int) -> LabeledBasis:
    """Complete n-qubit GHZ basis for 2 <= n <= 4.

    Outcome label bits are (m, n_1, ..., n_{n-1}): m is the relative-phase
    bit and n_j the XOR offset of qubit j+1 against the first qubit.
    """
    if not 2 <= n <= 4:
        raise ValueError(f"GHZ basis arity must be 2..4, got {n}")
    dim = 2**n
    s = 1.0 / math.sqrt(2.0)
    vectors = np.zeros((dim, dim), dtype=complex)
    labels = []
    for k in range(dim):
        bits = [(k >> (n - 1 - j)) & 1 for j in range(n)]
        m, offsets = bits[0], bits[1:]
        for r in (0, 1):
            idx = r
            for off in offsets:
                idx = (idx << 1) | (r ^ off)
            vectors[k, idx] += s * (-1.0) ** (m * r)
        labels.append("".join(str(b) for b in bits))
    return LabeledBasis(vectors=vectors, labels=tuple(labels), arity=n)


def rotate_basis(basis: LabeledBasis, local_unitaries) -> LabeledBasis:
    """Conjugate every projector by a tensor product of local unitaries.

    One 2x2 unitary per measured qubit; outcome labels are preserved.
    """
    locals_ = [np.asarray(u, dtype=complex) for u in local_unitaries]
    if len(locals_) != basis.arity:
        raise ValueError(f"expected {basis.arity} local unitaries, got {len(locals_)}")
    for u in locals_:
        if u.shape != (2, 2):
            raise ValueError("local unitaries must be 2x2")
        if np.max(np.abs(u.conj().T @ u - np.eye(2))) > linalg.ATOL:
            raise ValueError("matrix is not unitary")
    full = linalg.tensor_product(*locals_)
    return LabeledBasis(
        vectors=basis.vectors @ full.T, labels=basis.labels, arity=basis.arity
    )
