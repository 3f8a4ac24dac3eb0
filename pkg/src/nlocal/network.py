"""Network topologies, qubit-to-party assignment, and exact Born-rule outcome tables.

Two topologies are supported:

* linear: n two-qubit sources in a chain. Party 1 holds qubit 1 of source 1,
  party i (2 <= i <= n) holds qubit 2 of source i-1 and qubit 1 of source i,
  party n+1 holds qubit 2 of source n. The two end ("extreme") parties
  choose between two single-qubit directions; the n-1 middle
  ("intermediate") parties each perform one fixed complete Bell-basis
  measurement.
* nonlinear: n sources of n qubits each. Every source sends exactly one
  qubit to its extreme party (selected by the arrangement) and one qubit to
  each of the n-1 intermediate parties, which perform fixed complete
  GHZ-basis measurements on their n qubits (one per source, in source order).

``joint_distribution`` computes the exact outcome table for all extreme
input combinations. ``CompiledNetwork`` caches the fixed entangled
measurements so that repeated evaluation under changing extreme settings
(the optimizer's inner loop) only contracts 2x2 rotations.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from itertools import product as iterproduct
from typing import NamedTuple, Sequence

import numpy as np

from . import linalg
from .measurements import Direction, bell_basis, ghz_basis, qubit_basis

#: Hard cap on the joint register (dense amplitudes only).
MAX_REGISTER_QUBITS = 16
#: Probabilities below this are an internal-consistency error, above it they clip to 0.
PROB_FLOOR = -1e-12
NORM_ATOL = 1e-9
NO_SIGNALING_ATOL = 1e-9

LINEAR = "linear"
NONLINEAR = "nonlinear"


class RegisterSizeError(ValueError):
    """The joint register would exceed the supported qubit count."""


@dataclass(frozen=True)
class LinearNetwork:
    """Chain of n two-qubit sources shared pairwise by n+1 parties."""

    sources: tuple[np.ndarray, ...]

    @property
    def n(self) -> int:
        return len(self.sources)

    @property
    def n_qubits(self) -> int:
        return 2 * self.n

    @property
    def has_mixed_source(self) -> bool:
        return any(s.ndim == 2 for s in self.sources)


@dataclass(frozen=True)
class NonlinearNetwork:
    """n sources of n qubits each; arrangement picks each source's extreme qubit.

    ``intermediate_order[i]`` lists source i's remaining qubits in the
    order they go to the intermediate parties (position j to party j+1).
    """

    sources: tuple[np.ndarray, ...]
    arrangement: tuple[int, ...]
    intermediate_order: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.sources)

    @property
    def n_qubits(self) -> int:
        return self.n * self.n


def build_linear(states: Sequence[np.ndarray]) -> LinearNetwork:
    """Assemble a linear network from 2..5 two-qubit states (kets or density matrices)."""
    if not 2 <= len(states) <= 5:
        raise ValueError(f"linear network needs 2..5 sources, got {len(states)}")
    sources = []
    for k, s in enumerate(states):
        s = np.asarray(s, dtype=complex)
        if s.ndim == 1:
            if s.shape != (4,) or not linalg.is_state_vector(s):
                raise ValueError(f"source {k + 1} is not a normalized two-qubit ket")
        elif s.ndim == 2:
            if s.shape != (4, 4) or not linalg.is_density_matrix(s):
                raise ValueError(f"source {k + 1} is not a two-qubit density matrix")
        else:
            raise ValueError(f"source {k + 1} has unsupported rank {s.ndim}")
        s = s.copy()
        s.setflags(write=False)
        sources.append(s)
    return LinearNetwork(sources=tuple(sources))


def build_nonlinear(
    states: Sequence[np.ndarray],
    arrangement: Sequence[int],
    intermediate_order: Sequence[Sequence[int]] | None = None,
) -> NonlinearNetwork:
    """Assemble a nonlinear network from n pure n-qubit states, n in {3, 4}.

    ``arrangement[i]`` is the 1-based qubit of source i+1 sent to extreme
    party i+1. By default the remaining qubits go to the intermediate
    parties in ascending original order; ``intermediate_order`` overrides
    the per-source order (position j goes to intermediate party j+1),
    which realizes any qubit pattern compatible with the topology.
    """
    n = len(states)
    if n * n > MAX_REGISTER_QUBITS:
        raise RegisterSizeError(
            f"{n * n}-qubit register exceeds the {MAX_REGISTER_QUBITS}-qubit limit"
        )
    if n not in (3, 4):
        raise ValueError(f"nonlinear network needs 3 or 4 sources, got {n}")
    sources = []
    for k, s in enumerate(states):
        s = np.asarray(s, dtype=complex)
        if s.ndim != 1 or s.shape != (2**n,) or not linalg.is_state_vector(s):
            raise ValueError(f"source {k + 1} is not a normalized {n}-qubit ket")
        s = s.copy()
        s.setflags(write=False)
        sources.append(s)
    arrangement = tuple(int(a) for a in arrangement)
    if len(arrangement) != n or any(not 1 <= a <= n for a in arrangement):
        raise ValueError(f"arrangement must give one qubit index in 1..{n} per source")
    remaining = [
        tuple(l for l in range(1, n + 1) if l != arrangement[i]) for i in range(n)
    ]
    if intermediate_order is None:
        order = tuple(remaining)
    else:
        order = tuple(tuple(int(l) for l in o) for o in intermediate_order)
        if len(order) != n:
            raise ValueError("intermediate_order needs one entry per source")
        for i in range(n):
            if sorted(order[i]) != list(remaining[i]):
                raise ValueError(
                    f"intermediate_order for source {i + 1} must permute "
                    f"its non-extreme qubits {remaining[i]}"
                )
    return NonlinearNetwork(
        sources=tuple(sources), arrangement=arrangement, intermediate_order=order
    )


class _Layout(NamedTuple):
    """Global qubit axes per party, with qubit 0 the most significant."""

    extreme_axes: tuple[int, ...]
    intermediate_groups: tuple[tuple[int, ...], ...]
    arity: int
    n_qubits: int


def _layout(net) -> _Layout:
    if isinstance(net, LinearNetwork):
        n = net.n
        extremes = (0, 2 * n - 1)
        groups = tuple((2 * i + 1, 2 * i + 2) for i in range(n - 1))
        return _Layout(extremes, groups, 2, 2 * n)
    if isinstance(net, NonlinearNetwork):
        n = net.n
        extremes = tuple(i * n + (net.arrangement[i] - 1) for i in range(n))
        groups = tuple(
            tuple(i * n + (net.intermediate_order[i][j] - 1) for i in range(n))
            for j in range(n - 1)
        )
        return _Layout(extremes, groups, n, n * n)
    raise TypeError(f"unsupported network type {type(net).__name__}")


def _topology(net) -> str:
    return LINEAR if isinstance(net, LinearNetwork) else NONLINEAR


@dataclass(frozen=True)
class OutcomeDistribution:
    """Exact table P(outputs | inputs) over all parties.

    ``table`` axes are the extreme inputs x_1..x_E (size 2 each), then the
    extreme outputs a_1..a_E (size 2 each), then one axis of size
    2**intermediate_arity per intermediate party, indexed by the integer
    value of its MSB-first outcome label.
    """

    topology: str
    n_extreme: int
    n_intermediate: int
    intermediate_arity: int
    table: np.ndarray

    def __post_init__(self):
        expected = (
            (2,) * (2 * self.n_extreme)
            + (2**self.intermediate_arity,) * self.n_intermediate
        )
        if self.table.shape != expected:
            raise ValueError(f"table shape {self.table.shape} != expected {expected}")
        self.table.setflags(write=False)

    def prob(self, inputs, outputs, labels) -> float:
        """Probability of one outcome cell; labels are integers or bit strings."""
        labels = tuple(int(b, 2) if isinstance(b, str) else int(b) for b in labels)
        idx = tuple(inputs) + tuple(outputs) + labels
        return float(self.table[idx])

    def outcome_slice(self, inputs) -> np.ndarray:
        """Joint outcome table for one extreme-input combination."""
        return self.table[tuple(inputs)]

    def input_combinations(self):
        return iterproduct(range(2), repeat=self.n_extreme)

    def rows(self):
        """Yield (inputs, outputs, labels, probability) for every cell."""
        out_ranges = [range(2)] * self.n_extreme
        lab_ranges = [range(2**self.intermediate_arity)] * self.n_intermediate
        for x in self.input_combinations():
            block = self.table[x]
            for cell in iterproduct(*out_ranges, *lab_ranges):
                a = cell[: self.n_extreme]
                b = cell[self.n_extreme :]
                yield x, a, b, float(block[cell])

    def to_csv(self, path_or_buf) -> None:
        """Write the table as CSV: input bits, output bits, label bit-strings, probability."""
        own = isinstance(path_or_buf, (str, bytes))
        fh = open(path_or_buf, "w", newline="") if own else path_or_buf
        try:
            writer = csv.writer(fh)
            header = (
                [f"x{i + 1}" for i in range(self.n_extreme)]
                + [f"a{i + 1}" for i in range(self.n_extreme)]
                + [f"b{j + 1}" for j in range(self.n_intermediate)]
                + ["probability"]
            )
            writer.writerow(header)
            width = self.intermediate_arity
            for x, a, b, p in self.rows():
                writer.writerow(
                    list(x) + list(a) + [format(k, f"0{width}b") for k in b]
                    + [f"{p:.17g}"]
                )
        finally:
            if own:
                fh.close()

    def to_text(self, max_rows: int | None = 24) -> str:
        """Human-readable listing of the largest-probability cells per input."""
        lines = [
            f"{self.topology} distribution: {self.n_extreme} extreme, "
            f"{self.n_intermediate} intermediate (arity {self.intermediate_arity})"
        ]
        width = self.intermediate_arity
        rows = sorted(self.rows(), key=lambda r: -r[3])
        if max_rows is not None:
            rows = rows[:max_rows]
        for x, a, b, p in rows:
            xs = "".join(map(str, x))
            as_ = "".join(map(str, a))
            bs = " ".join(format(k, f"0{width}b") for k in b)
            lines.append(f"  x={xs}  a={as_}  b={bs}  p={p:.6f}")
        return "\n".join(lines)


def make_distribution(
    topology: str,
    n_extreme: int,
    n_intermediate: int,
    intermediate_arity: int,
    table: np.ndarray,
) -> OutcomeDistribution:
    """Clip numerical noise, validate normalization, and freeze the table."""
    table = np.asarray(table, dtype=float)
    low = float(table.min())
    if low < PROB_FLOOR:
        raise ValueError(f"probability {low} below the numerical floor {PROB_FLOOR}")
    table = np.clip(table, 0.0, 1.0)
    sums = table.reshape((2,) * n_extreme + (-1,)).sum(axis=-1)
    if np.max(np.abs(sums - 1.0)) > NORM_ATOL:
        raise ValueError("outcome probabilities do not sum to 1 for every input")
    return OutcomeDistribution(
        topology=topology,
        n_extreme=n_extreme,
        n_intermediate=n_intermediate,
        intermediate_arity=intermediate_arity,
        table=table,
    )


class CompiledNetwork:
    """Network with the fixed entangled measurements already contracted.

    Construction permutes the joint state to party order and applies each
    intermediate party's basis transform once; ``distribution`` then only
    contracts one 2x2 rotation per extreme party and input.
    """

    def __init__(self, net):
        lay = _layout(net)
        if lay.n_qubits > MAX_REGISTER_QUBITS:
            raise RegisterSizeError(
                f"{lay.n_qubits}-qubit register exceeds the "
                f"{MAX_REGISTER_QUBITS}-qubit limit"
            )
        self.net = net
        self.topology = _topology(net)
        self.n_extreme = len(lay.extreme_axes)
        self.n_intermediate = len(lay.intermediate_groups)
        self.arity = lay.arity
        basis = bell_basis() if self.topology == LINEAR else ghz_basis(lay.arity)
        amp_matrix = basis.amplitude_matrix()
        perm = list(lay.extreme_axes) + [
            ax for group in lay.intermediate_groups for ax in group
        ]
        dim_labels = 2**self.arity
        grouped = (2,) * self.n_extreme + (dim_labels,) * self.n_intermediate

        self._pure = not getattr(net, "has_mixed_source", False)
        if self._pure:
            psi = linalg.tensor_product(*net.sources)
            psi = psi.reshape((2,) * lay.n_qubits).transpose(perm).reshape(grouped)
            for j in range(self.n_intermediate):
                axis = self.n_extreme + j
                psi = np.moveaxis(np.tensordot(amp_matrix, psi, axes=(1, axis)), 0, axis)
            self._amp = psi
        else:
            rho = linalg.tensor_product(*(linalg.as_density_matrix(s) for s in net.sources))
            q = lay.n_qubits
            rho = rho.reshape((2,) * (2 * q))
            rho = rho.transpose(perm + [p + q for p in perm])
            dim = 2**q
            rho = rho.reshape(dim, dim)
            w_int = np.eye(1, dtype=complex)
            for _ in range(self.n_intermediate):
                w_int = np.kron(w_int, amp_matrix)
            w = np.kron(np.eye(2**self.n_extreme, dtype=complex), w_int)
            rho = w @ rho @ w.conj().T
            e_dim = 2**self.n_extreme
            b_dim = dim_labels**self.n_intermediate
            rho4 = rho.reshape(e_dim, b_dim, e_dim, b_dim)
            # Only the b-diagonal survives the fixed measurements.
            self._rho_diag = np.ascontiguousarray(np.einsum("ebfb->ebf", rho4))
        self._grouped = grouped

    def distribution(self, extreme_settings) -> OutcomeDistribution:
        """Exact outcome table for per-party (direction_0, direction_1) settings."""
        settings = tuple(extreme_settings)
        if len(settings) != self.n_extreme:
            raise ValueError(
                f"expected settings for {self.n_extreme} extreme parties, "
                f"got {len(settings)}"
            )
        mats = []
        for pair in settings:
            d0, d1 = pair
            mats.append(
                (
                    qubit_basis(d0).amplitude_matrix(),
                    qubit_basis(d1).amplitude_matrix(),
                )
            )
        e = self.n_extreme
        table = np.empty((2,) * e + self._grouped)
        for xvec in iterproduct(range(2), repeat=e):
            if self._pure:
                amp = self._amp
                for i, x in enumerate(xvec):
                    amp = np.moveaxis(np.tensordot(mats[i][x], amp, axes=(1, i)), 0, i)
                table[xvec] = np.abs(amp) ** 2
            else:
                w = np.eye(1, dtype=complex)
                for i, x in enumerate(xvec):
                    w = np.kron(w, mats[i][x])
                probs = np.einsum(
                    "ae,af,ebf->ab", w, w.conj(), self._rho_diag, optimize=True
                ).real
                table[xvec] = probs.reshape(self._grouped)
        return make_distribution(
            self.topology, e, self.n_intermediate, self.arity, table
        )


def compile_network(net) -> CompiledNetwork:
    return CompiledNetwork(net)


def joint_distribution(net, extreme_settings) -> OutcomeDistribution:
    """Exact Born-rule outcome table for every extreme-input combination.

    ``extreme_settings`` supplies, per extreme party, the pair of
    measurement directions for inputs 0 and 1.
    """
    return CompiledNetwork(net).distribution(extreme_settings)


def joint_distribution_reference(net, extreme_settings) -> OutcomeDistribution:
    """Naive Born-rule evaluation: one explicit joint projector per outcome cell.

    Reference implementation used to validate the contracted path; limited
    to registers of at most 10 qubits.
    """
    lay = _layout(net)
    if lay.n_qubits > 10:
        raise RegisterSizeError("reference path supports at most 10 qubits")
    settings = tuple(extreme_settings)
    if len(settings) != len(lay.extreme_axes):
        raise ValueError("one (direction_0, direction_1) pair per extreme party")
    basis = bell_basis() if _topology(net) == LINEAR else ghz_basis(lay.arity)
    e = len(lay.extreme_axes)
    n_int = len(lay.intermediate_groups)
    dim_labels = 2**lay.arity

    pure = not getattr(net, "has_mixed_source", False)
    if pure:
        psi = linalg.tensor_product(*net.sources)
    else:
        rho = linalg.tensor_product(
            *(linalg.as_density_matrix(s) for s in net.sources)
        )

    # Map a party-ordered tensor axis back to its global qubit axis.
    perm = list(lay.extreme_axes) + [ax for g in lay.intermediate_groups for ax in g]
    inverse = np.argsort(perm)

    ext_vectors = [
        (qubit_basis(pair[0]).vectors, qubit_basis(pair[1]).vectors)
        for pair in settings
    ]
    table = np.empty((2,) * e + (2,) * e + (dim_labels,) * n_int)
    for xvec in iterproduct(range(2), repeat=e):
        for cell in iterproduct(*([range(2)] * e + [range(dim_labels)] * n_int)):
            a, b = cell[:e], cell[e:]
            factors = [ext_vectors[i][x][a[i]] for i, x in enumerate(xvec)]
            factors += [basis.vectors[k] for k in b]
            phi = linalg.tensor_product(*factors)
            phi = phi.reshape((2,) * lay.n_qubits).transpose(inverse).reshape(-1)
            if pure:
                p = abs(np.vdot(phi, psi)) ** 2
            else:
                p = np.vdot(phi, rho @ phi).real
            table[xvec + cell] = p
    return make_distribution(_topology(net), e, n_int, lay.arity, table)


class NoSignalingReport(NamedTuple):
    ok: bool
    max_deviation: float


def check_no_signaling(
    d: OutcomeDistribution, atol: float = NO_SIGNALING_ATOL
) -> NoSignalingReport:
    """Verify that no party's marginals depend on any other party's input.

    For each extreme party the complement's joint marginal is compared
    across that party's two inputs; the maximum absolute deviation is
    reported. Intermediate parties have a single fixed input.
    """
    worst = 0.0
    for i in range(d.n_extreme):
        marg = d.table.sum(axis=d.n_extreme + i)
        d0 = np.take(marg, 0, axis=i)
        d1 = np.take(marg, 1, axis=i)
        worst = max(worst, float(np.max(np.abs(d0 - d1))))
    return NoSignalingReport(ok=worst < atol, max_deviation=worst)
