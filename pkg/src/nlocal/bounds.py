"""Closed-form violation bounds and the Horodecki CHSH criterion.

These formulas are the analytic oracles against which the numerical
optimizer is validated: the chain bound for pure Schmidt sources, the
chain bound for mixed sources in terms of correlation-tensor singular
values, the CHSH criterion of a single two-qubit state, and the trilocal
bound for identical biseparable sources whose entangled pair is held
entirely by the intermediate parties.
"""

from __future__ import annotations

import math

import numpy as np

from .states import correlation_tensor

_SORT_ATOL = 1e-9


def bound_linear_pure(gammas) -> float:
    """sqrt(1 + 2^n prod gamma0_i gamma1_i) for n pure Schmidt sources."""
    gammas = [float(g) for g in gammas]
    if not gammas:
        raise ValueError("at least one Schmidt coefficient is required")
    prod = 1.0
    for g in gammas:
        if not 0.0 <= g <= 1.0:
            raise ValueError(f"Schmidt coefficient must lie in [0, 1], got {g}")
        prod *= g * math.sqrt(1.0 - g * g)
    return math.sqrt(1.0 + 2 ** len(gammas) * prod)


def bound_linear_mixed(lambda_triples) -> float:
    """sqrt(prod lambda1_j + prod lambda2_j) for n mixed sources.

    Each entry is that source's correlation-tensor singular values sorted
    descending.
    """
    triples = [tuple(float(x) for x in t) for t in lambda_triples]
    if not triples:
        raise ValueError("at least one singular-value triple is required")
    p1 = p2 = 1.0
    for t in triples:
        if len(t) != 3:
            raise ValueError("each entry must be a triple of singular values")
        if t[0] < t[1] - _SORT_ATOL or t[1] < t[2] - _SORT_ATOL:
            raise ValueError(f"singular values must be sorted descending, got {t}")
        if t[0] > 1.0 + _SORT_ATOL or t[2] < -_SORT_ATOL:
            raise ValueError(f"singular values must lie in [0, 1], got {t}")
        p1 *= t[0]
        p2 *= t[1]
    return math.sqrt(p1 + p2)


def chsh_horodecki(rho: np.ndarray) -> float:
    """CHSH bound sqrt(lambda1^2 + lambda2^2) of a two-qubit density matrix.

    Values above 1 certify that the state violates the CHSH inequality.
    """
    lam = correlation_tensor(rho).lambdas
    return math.sqrt(lam[0] ** 2 + lam[1] ** 2)


def bound_bisep_231(c0: float) -> float:
    """Trilocal bound for identical sources with the entangled pair on qubits 2, 3.

    With qubit 1 sent to the extreme parties the pair is measured entirely
    by the intermediate parties, and the maximum over all settings is
    max(2^(2/3) |c0 c1|, (c0^4 + 4 c0^3 c1^3 + c1^4)^(1/3)) with
    c1 = sqrt(1 - c0^2). The value never exceeds 1.
    """
    if not 0.0 <= c0 <= 1.0:
        raise ValueError(f"pair amplitude must lie in [0, 1], got {c0}")
    c1 = math.sqrt(1.0 - c0 * c0)
    first = 2.0 ** (2.0 / 3.0) * abs(c0 * c1)
    second = (c0**4 + 4.0 * c0**3 * c1**3 + c1**4) ** (1.0 / 3.0)
    return max(first, second)
