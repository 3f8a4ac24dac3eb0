"""Source-independent classical hidden-variable models and certification sweeps.

Each source carries its own hidden variable with an independent
distribution over a finite alphabet (the product form is structural: no
joint table exists). Parties respond deterministically (extreme parties
to (input, own source's variable), intermediate parties to the variables
of every source they touch) and stochastic responses arise as mixtures.

``certify`` samples many such models, evaluates the full inequality
family on each exact model distribution, and reports the maximum
left-hand side seen together with any violations (expected: none).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iterproduct

import numpy as np

from .inequalities import (
    VIOLATION_ATOL,
    linear_correlators,
    linear_value,
    nlocal_all,
    trilocal_all,
)
from .network import LINEAR, NONLINEAR, OutcomeDistribution, make_distribution

MAX_SOURCES = 4
MAX_ALPHABET = 8


def _seed_seq(seed, *extra: int) -> np.random.SeedSequence:
    """SeedSequence from an int or flat int tuple, plus derivation words."""
    entropy = tuple(seed) if isinstance(seed, (tuple, list)) else (int(seed),)
    return np.random.SeedSequence(entropy + tuple(extra))


def _normalize_topology(topology: str, n: int | None = None) -> tuple[str, int]:
    if topology == "trilocal":
        topology, n = NONLINEAR, 3
    if n is None:
        raise ValueError("source count n is required")
    if topology == LINEAR:
        if not 2 <= n <= MAX_SOURCES:
            raise ValueError(f"linear models support 2..{MAX_SOURCES} sources, got {n}")
    elif topology == NONLINEAR:
        if n not in (3, 4):
            raise ValueError(f"non-linear models support 3 or 4 sources, got {n}")
    else:
        raise ValueError(f"unknown topology {topology!r}")
    return topology, n


@dataclass(frozen=True)
class ClassicalModel:
    """Deterministic response tables over independent per-source variables.

    ``source_dists[i]`` is the distribution of source i's variable.
    ``extreme_responses[p, x, eta]`` is extreme party p's output bit;
    ``intermediate_responses[j]`` maps the variables a party sees (two
    adjacent sources in the linear chain, all sources otherwise) to its
    outcome-label index.
    """

    topology: str
    n: int
    alphabet: int
    source_dists: np.ndarray
    extreme_responses: np.ndarray
    intermediate_responses: np.ndarray

    def __post_init__(self):
        for arr in (self.source_dists, self.extreme_responses, self.intermediate_responses):
            arr.setflags(write=False)
        if np.max(np.abs(self.source_dists.sum(axis=1) - 1.0)) > 1e-12:
            raise ValueError("each source distribution must sum to 1")

    @property
    def n_extreme(self) -> int:
        return 2 if self.topology == LINEAR else self.n

    @property
    def intermediate_arity(self) -> int:
        return 2 if self.topology == LINEAR else self.n

    def to_dict(self) -> dict:
        return {
            "topology": self.topology,
            "n": self.n,
            "alphabet": self.alphabet,
            "source_dists": self.source_dists.tolist(),
            "extreme_responses": self.extreme_responses.tolist(),
            "intermediate_responses": self.intermediate_responses.tolist(),
        }


def sample_model(topology: str, n: int, alphabet: int = 4, seed: int = 0) -> ClassicalModel:
    """Draw source distributions from the uniform simplex and uniform response tables."""
    topology, n = _normalize_topology(topology, n)
    if not 1 <= alphabet <= MAX_ALPHABET:
        raise ValueError(f"alphabet size must be 1..{MAX_ALPHABET}, got {alphabet}")
    rng = np.random.default_rng(_seed_seq(seed))
    dists = _simplex_rows(rng, n, alphabet)
    n_extreme = 2 if topology == LINEAR else n
    extremes = rng.integers(0, 2, size=(n_extreme, 2, alphabet))
    if topology == LINEAR:
        inter = rng.integers(0, 4, size=(n - 1,) + (alphabet,) * 2)
    else:
        inter = rng.integers(0, 2**n, size=(n - 1,) + (alphabet,) * n)
    return ClassicalModel(
        topology=topology,
        n=n,
        alphabet=alphabet,
        source_dists=dists,
        extreme_responses=extremes,
        intermediate_responses=inter,
    )


def constant_model(topology: str, n: int) -> ClassicalModel:
    """Degenerate single-letter model with every response fixed to 0."""
    topology, n = _normalize_topology(topology, n)
    n_extreme = 2 if topology == LINEAR else n
    eta_axes = 2 if topology == LINEAR else n
    return ClassicalModel(
        topology=topology,
        n=n,
        alphabet=1,
        source_dists=np.ones((n, 1)),
        extreme_responses=np.zeros((n_extreme, 2, 1), dtype=np.int64),
        intermediate_responses=np.zeros((n - 1,) + (1,) * eta_axes, dtype=np.int64),
    )


def _simplex_rows(rng: np.random.Generator, rows: int, size: int) -> np.ndarray:
    draws = rng.exponential(size=(rows, size))
    return draws / draws.sum(axis=1, keepdims=True)


def model_distribution(m: ClassicalModel) -> OutcomeDistribution:
    """Exact outcome table, summing the product weights over all variable tuples."""
    k = m.alphabet
    eta = np.indices((k,) * m.n).reshape(m.n, -1)
    weights = np.prod(
        [m.source_dists[i, eta[i]] for i in range(m.n)], axis=0
    )
    n_extreme = m.n_extreme
    arity = m.intermediate_arity
    n_inter = m.n - 1
    out_shape = (2,) * n_extreme + (2**arity,) * n_inter

    if m.topology == LINEAR:
        extreme_sources = (0, m.n - 1)
        labels = [
            m.intermediate_responses[j][eta[j], eta[j + 1]] for j in range(n_inter)
        ]
    else:
        extreme_sources = tuple(range(m.n))
        labels = [
            m.intermediate_responses[j][tuple(eta)] for j in range(n_inter)
        ]

    table = np.empty((2,) * n_extreme + out_shape)
    n_cells = int(np.prod(out_shape))
    for xvec in iterproduct(range(2), repeat=n_extreme):
        outputs = [
            m.extreme_responses[i, xvec[i], eta[extreme_sources[i]]]
            for i in range(n_extreme)
        ]
        flat = np.ravel_multi_index(tuple(outputs) + tuple(labels), out_shape)
        table[xvec] = np.bincount(flat, weights=weights, minlength=n_cells).reshape(
            out_shape
        )
    return make_distribution(m.topology, n_extreme, n_inter, arity, table)


def mix_distributions(dists, weights) -> OutcomeDistribution:
    """Convex mixture of outcome tables of identical shape."""
    dists = list(dists)
    w = np.asarray(weights, dtype=float)
    if len(dists) != w.shape[0] or len(dists) == 0:
        raise ValueError("one weight per distribution is required")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be a probability vector")
    first = dists[0]
    table = sum(wi * d.table for wi, d in zip(w, dists))
    return make_distribution(
        first.topology,
        first.n_extreme,
        first.n_intermediate,
        first.intermediate_arity,
        table,
    )


def _parties_touching(topology: str, n: int, source: int):
    """(extreme indices, intermediate indices) whose view includes the source."""
    if topology == LINEAR:
        extremes = [i for i in (0, 1) if (0, n - 1)[i] == source]
        inters = [j for j in range(n - 1) if source in (j, j + 1)]
    else:
        extremes = [source]
        inters = list(range(n - 1))
    return extremes, inters


def structured_mixture(
    topology: str, n: int, alphabet: int, seed: int, components: int = 2
) -> OutcomeDistribution:
    """Mixture of models sharing source distributions that still lies in the model class.

    The components differ only in the responses of parties that see one
    designated source, so the mixture is reproduced by a single model with
    that source's alphabet enlarged by the component label, so the mixture
    never leaves the source-independent set.
    """
    if components < 2:
        raise ValueError("a mixture needs at least two components")
    topology, n = _normalize_topology(topology, n)
    base = sample_model(topology, n, alphabet, seed)
    rng = np.random.default_rng(_seed_seq(seed, 0x31))
    source = int(rng.integers(0, n))
    extremes_vary, inters_vary = _parties_touching(topology, n, source)

    models = [base]
    for _ in range(components - 1):
        ext = base.extreme_responses.copy()
        for i in extremes_vary:
            ext[i] = rng.integers(0, 2, size=ext[i].shape)
        inter = base.intermediate_responses.copy()
        for j in inters_vary:
            inter[j] = rng.integers(0, 2**base.intermediate_arity, size=inter[j].shape)
        models.append(
            ClassicalModel(
                topology=topology,
                n=n,
                alphabet=alphabet,
                source_dists=base.source_dists.copy(),
                extreme_responses=ext,
                intermediate_responses=inter,
            )
        )
    weights = _simplex_rows(rng, 1, components)[0]
    return mix_distributions([model_distribution(m) for m in models], weights)


@dataclass(frozen=True)
class CertifyReport:
    """Outcome of a model-sampling sweep against one inequality family."""

    topology: str
    n: int
    alphabet: int
    trials: int
    max_lhs: float
    failures: tuple[int, ...]
    failure_dumps: tuple[dict, ...]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "topology": self.topology,
            "n": self.n,
            "alphabet": self.alphabet,
            "trials": self.trials,
            "max_lhs": self.max_lhs,
            "failures": list(self.failures),
            "failure_dumps": list(self.failure_dumps),
        }


def _family_max(topology: str, n: int, d: OutcomeDistribution) -> float:
    if topology == LINEAR:
        return linear_value(*linear_correlators(d))
    if n == 3:
        return trilocal_all(d).max_lhs
    return nlocal_all(d, n).max_lhs


def certify(
    topology: str,
    n: int,
    trials: int,
    seed: int = 0,
    alphabet: int = 4,
    mixture_every: int = 8,
) -> CertifyReport:
    """Sample models and check the family bound on every exact model distribution.

    Every ``mixture_every``-th trial uses a structured mixture (see
    ``structured_mixture``) instead of a single model, exercising the
    closure of the model class at the distribution level.
    """
    topology, n = _normalize_topology(topology, n)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    max_lhs = 0.0
    failures = []
    dumps = []
    for t in range(trials):
        trial_seed = (int(seed), t)
        mixed = mixture_every > 0 and t % mixture_every == mixture_every - 1
        if mixed:
            dist = structured_mixture(topology, n, alphabet, seed=trial_seed)
            dump = {"kind": "structured_mixture", "seed": trial_seed}
        else:
            model = sample_model(topology, n, alphabet, seed=trial_seed)
            dist = model_distribution(model)
            dump = {"kind": "model", "seed": trial_seed}
        value = _family_max(topology, n, dist)
        if value > max_lhs:
            max_lhs = value
        if value > 1.0 + VIOLATION_ATOL:
            failures.append(t)
            if dump["kind"] == "model":
                dump["model"] = model.to_dict()
            dump["value"] = value
            dumps.append(dump)
    return CertifyReport(
        topology=topology,
        n=n,
        alphabet=alphabet,
        trials=trials,
        max_lhs=max_lhs,
        failures=tuple(failures),
        failure_dumps=tuple(dumps),
    )
