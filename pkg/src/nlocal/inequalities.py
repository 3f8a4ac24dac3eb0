"""Correlators and non-linear Bell-type inequality families for network tables.

Three families are evaluated:

* linear:   sqrt|I| + sqrt|J| <= 1 over the chain network's correlators.
* trilocal: the 16 inequalities cbrt|I_{m1,m2,0}| + cbrt|I_{n1,n2,1}| <= 1
  over the three-source non-linear network.
* nlocal:   the general n-source set with n-th roots and 4^(n-1)
  selector pairs.

Intermediate outcome labels enter through parity functions of their bits.
The trilocal family uses the complemented linear form on level 0
(s0 = x+y+z+1 mod 2), the general family the plain elementary symmetric
polynomials; the two conventions differ only by a global sign that the
absolute values absorb.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product as iterproduct

import numpy as np

from .network import LINEAR, NONLINEAR, OutcomeDistribution

#: A family value above 1 + VIOLATION_ATOL counts as a genuine violation.
VIOLATION_ATOL = 1e-9

#: Correlators below this magnitude are treated as exactly zero before the
#: fractional roots. Exactly-zero correlators carry ~1e-14 float
#: cancellation noise, which a cube root would otherwise inflate into
#: ~1e-5 artifacts on the inequality values.
CORRELATOR_NOISE_FLOOR = 1e-12

_EXTREME_SIGNS = np.array([1.0, -1.0])


def _rooted(value: float, root: float) -> float:
    mag = abs(value)
    return 0.0 if mag < CORRELATOR_NOISE_FLOOR else mag**root


def symmetric_parity(level: int, bits) -> int:
    """Elementary symmetric polynomial of degree level+1 of the bits, mod 2."""
    bits = tuple(int(b) for b in bits)
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bits must be 0/1")
    if not 0 <= level <= len(bits) - 1:
        raise ValueError(f"level {level} out of range for {len(bits)} bits")
    # e_k over 0/1 variables counts k-subsets of the set bits: C(weight, k).
    return math.comb(sum(bits), level + 1) % 2


def parity(level: int, bits) -> int:
    """Outcome-label parity function used by the inequality correlators.

    Three-bit labels follow the trilocal convention, whose level-0 function
    is the complemented bit sum; all other arities use the plain elementary
    symmetric form.
    """
    s = symmetric_parity(level, bits)
    if len(tuple(bits)) == 3 and level == 0:
        s ^= 1
    return s


@lru_cache(maxsize=None)
def _label_signs(level: int, arity: int, complemented: bool) -> np.ndarray:
    """(-1)**s_level applied to every MSB-first label index of the given arity."""
    signs = np.empty(2**arity)
    for k in range(2**arity):
        bits = [(k >> (arity - 1 - j)) & 1 for j in range(arity)]
        s = symmetric_parity(level, bits)
        if complemented and level == 0:
            s ^= 1
        signs[k] = -1.0 if s else 1.0
    signs.setflags(write=False)
    return signs


def _expectations(d: OutcomeDistribution, label_signs) -> np.ndarray:
    """Parity-weighted correlator for every input combination.

    Contracts the extreme outputs with (-1)**a and each intermediate label
    axis with the given sign vector, leaving the input axes.
    """
    t = d.table
    for s in reversed(label_signs):
        t = t @ s
    for _ in range(d.n_extreme):
        t = t @ _EXTREME_SIGNS
    return t


@dataclass(frozen=True)
class InequalityReport:
    """Correlators, per-inequality left-hand sides, and the violation verdict."""

    family: str
    correlators: dict[str, float]
    lhs_values: dict[str, float]
    max_lhs: float
    violated: bool

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "correlators": dict(self.correlators),
            "lhs_values": dict(self.lhs_values),
            "max_lhs": self.max_lhs,
            "violated": self.violated,
        }

    def to_text(self) -> str:
        lines = [f"family: {self.family}"]
        for key, val in self.correlators.items():
            lines.append(f"  correlator {key}: {val:+.9f}")
        for key, val in self.lhs_values.items():
            lines.append(f"  lhs {key}: {val:.9f}")
        lines.append(f"  max lhs: {self.max_lhs:.9f}")
        lines.append(f"  violated: {self.violated}")
        return "\n".join(lines)


def _require(d: OutcomeDistribution, topology: str, n_extreme: int | None = None):
    if d.topology != topology:
        raise ValueError(f"distribution topology {d.topology!r}, expected {topology!r}")
    if n_extreme is not None and d.n_extreme != n_extreme:
        raise ValueError(
            f"distribution has {d.n_extreme} extreme parties, expected {n_extreme}"
        )


def linear_correlators(d: OutcomeDistribution) -> tuple[float, float]:
    """(I, J) of the chain network.

    I averages the correlator built from the first bit of every
    intermediate label over the extreme inputs; J uses the second bit with
    the extra (-1)**(x_1 + x_last) input weight.
    """
    _require(d, LINEAR, n_extreme=2)
    sign_x = np.array([[1.0, -1.0], [-1.0, 1.0]])  # (-1)**(x1+x2)
    e_i = _expectations(d, [_label_signs_bit(0)] * d.n_intermediate)
    e_j = _expectations(d, [_label_signs_bit(1)] * d.n_intermediate)
    return float(e_i.mean()), float((sign_x * e_j).mean())


@lru_cache(maxsize=None)
def _label_signs_bit(bit: int) -> np.ndarray:
    """(-1)**b_bit over the four Bell labels (b0 b1)."""
    signs = np.array([(-1.0) ** ((k >> (1 - bit)) & 1) for k in range(4)])
    signs.setflags(write=False)
    return signs


def linear_value(i_corr: float, j_corr: float) -> float:
    """Left-hand side sqrt|I| + sqrt|J| of the chain inequality."""
    if abs(i_corr) > 1.0 + VIOLATION_ATOL or abs(j_corr) > 1.0 + VIOLATION_ATOL:
        raise ValueError("correlators must lie in [-1, 1]")
    return _rooted(i_corr, 0.5) + _rooted(j_corr, 0.5)


def _input_parity_signs(n: int) -> np.ndarray:
    signs = np.ones((2,) * n)
    for axis in range(n):
        shape = [1] * n
        shape[axis] = 2
        signs = signs * np.array([1.0, -1.0]).reshape(shape)
    return signs


def _selector_correlator(
    d: OutcomeDistribution, selectors, input_parity: int, complemented: bool
) -> float:
    signs = [
        _label_signs(sel, d.intermediate_arity, complemented) for sel in selectors
    ]
    e_tab = _expectations(d, signs)
    if input_parity:
        e_tab = e_tab * _input_parity_signs(d.n_extreme)
    return float(e_tab.mean())


def trilocal_correlator(d: OutcomeDistribution, m1: int, m2: int, par: int) -> float:
    """Correlator I_{m1,m2,par} of the three-source non-linear network."""
    _require(d, NONLINEAR, n_extreme=3)
    for v in (m1, m2, par):
        if v not in (0, 1):
            raise ValueError("selector bits must be 0 or 1")
    return _selector_correlator(d, (m1, m2), par, complemented=True)


def trilocal_all(d: OutcomeDistribution) -> InequalityReport:
    """All 16 trilocal inequalities: cbrt|I_{m,0}| + cbrt|I_{n,1}| <= 1."""
    _require(d, NONLINEAR, n_extreme=3)
    corr = {}
    for m1, m2, i in iterproduct((0, 1), repeat=3):
        corr[(m1, m2, i)] = trilocal_correlator(d, m1, m2, i)
    root = 1.0 / 3.0
    lhs = {}
    for m1, m2, n1, n2 in iterproduct((0, 1), repeat=4):
        lhs[f"{m1}{m2}|{n1}{n2}"] = _rooted(corr[(m1, m2, 0)], root) + _rooted(
            corr[(n1, n2, 1)], root
        )
    max_lhs = max(lhs.values())
    return InequalityReport(
        family="trilocal",
        correlators={f"{m1}{m2},{i}": v for (m1, m2, i), v in corr.items()},
        lhs_values=lhs,
        max_lhs=max_lhs,
        violated=max_lhs > 1.0 + VIOLATION_ATOL,
    )


def nlocal_all(d: OutcomeDistribution, n: int) -> InequalityReport:
    """The general source-count-n inequality set with n-th roots.

    Selector vectors f (for input-parity 0) and g (for input-parity 1) run
    over {0,1}^(n-1), one parity level per intermediate party, applied to
    that party's own output bits with the plain symmetric convention.
    """
    if n not in (3, 4):
        raise ValueError(f"supported source counts are 3 and 4, got {n}")
    _require(d, NONLINEAR, n_extreme=n)
    if d.n_intermediate != n - 1 or d.intermediate_arity != n:
        raise ValueError("distribution shape does not match the source count")
    selectors = list(iterproduct((0, 1), repeat=n - 1))
    corr = {}
    for f in selectors:
        for par in (0, 1):
            corr[(f, par)] = _selector_correlator(d, f, par, complemented=False)
    root = 1.0 / n
    lhs = {}
    for f in selectors:
        for g in selectors:
            key = "".join(map(str, f)) + "|" + "".join(map(str, g))
            lhs[key] = _rooted(corr[(f, 0)], root) + _rooted(corr[(g, 1)], root)
    max_lhs = max(lhs.values())
    return InequalityReport(
        family="nlocal",
        correlators={
            "".join(map(str, f)) + f",{i}": v for (f, i), v in corr.items()
        },
        lhs_values=lhs,
        max_lhs=max_lhs,
        violated=max_lhs > 1.0 + VIOLATION_ATOL,
    )


def coarse_graining_consistency(d: OutcomeDistribution) -> float:
    """Max deviation between the direct and coarse-grained five-party correlators.

    For each parity-level choice (y1, y2) the correlator is computed (i)
    directly with parity-weighted signs over the full labels and (ii) by
    first collapsing every intermediate label to its parity bit and then
    taking the plain +/-1 correlator. The two routes are algebraically
    identical; their numerical gap is returned.
    """
    _require(d, NONLINEAR, n_extreme=3)
    pm = np.array([1.0, -1.0])
    worst = 0.0
    for y1, y2 in iterproduct((0, 1), repeat=2):
        s1 = _label_signs(y1, d.intermediate_arity, complemented=True)
        s2 = _label_signs(y2, d.intermediate_arity, complemented=True)
        direct = _expectations(d, [s1, s2])

        ind1 = _parity_indicator(s1)
        ind2 = _parity_indicator(s2)
        coarse = np.einsum("xyzabcde,pd,qe->xyzabcpq", d.table, ind1, ind2)
        t = coarse
        for s in (pm, pm):
            t = t @ s
        for _ in range(3):
            t = t @ pm
        worst = max(worst, float(np.max(np.abs(direct - t))))
    return worst


def _parity_indicator(signs: np.ndarray) -> np.ndarray:
    """Indicator matrix grouping label indices by their parity bit."""
    bits = ((1.0 - signs) / 2.0).astype(int)
    ind = np.zeros((2, signs.shape[0]))
    ind[bits, np.arange(signs.shape[0])] = 1.0
    return ind
