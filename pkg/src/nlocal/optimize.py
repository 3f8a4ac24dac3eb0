"""Derivative-free maximization of inequality values over measurement directions.

The objective, the maximum left-hand side of the chosen inequality
family as a function of the extreme parties' measurement angles, has
absolute-value kinks and fractional roots, so the search is a multistart
Nelder-Mead simplex over the 4 * (number of extreme parties) angles.
Restart starting points combine two canonical settings (all along z, and
the z-x plane pair at +/- pi/4 that attains the known chain optima) with a
seeded Latin-hypercube design; everything is deterministic given the seed.

Polar angles are reflected at the [0, pi] boundaries and azimuths wrap
modulo 2 pi, which removes artificial boundary optima.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iterproduct

import numpy as np

from .inequalities import linear_correlators, linear_value, nlocal_all, trilocal_all
from .measurements import Direction
from .network import (
    LINEAR,
    CompiledNetwork,
    LinearNetwork,
    NonlinearNetwork,
    compile_network,
)

FAMILIES = ("linear", "trilocal", "nlocal")
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class OptimizeConfig:
    restarts: int = 32
    max_iters: int = 400
    tolerance: float = 1e-6
    seed: int = 0
    theta_bounds: tuple[float, float] = (0.0, math.pi)
    phi_bounds: tuple[float, float] = (0.0, TWO_PI)

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True)
class OptimumResult:
    """Best value found, the settings attaining it, and per-restart bests."""

    best_value: float
    best_settings: tuple[tuple[Direction, Direction], ...]
    trace: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "best_value": self.best_value,
            "best_settings": [
                [{"theta": d.theta, "phi": d.phi} for d in pair]
                for pair in self.best_settings
            ],
            "trace": list(self.trace),
        }


def _fold_angles(params: np.ndarray) -> np.ndarray:
    """Reflect polar angles into [0, pi], wrap azimuths into [0, 2 pi)."""
    folded = np.array(params, dtype=float)
    thetas = folded[0::2] % TWO_PI
    thetas = np.where(thetas > math.pi, TWO_PI - thetas, thetas)
    folded[0::2] = thetas
    folded[1::2] = folded[1::2] % TWO_PI
    return folded


def _params_to_settings(params: np.ndarray) -> tuple[tuple[Direction, Direction], ...]:
    """Four consecutive entries (theta0, phi0, theta1, phi1) per extreme party."""
    settings = []
    for base in range(0, params.shape[0], 4):
        settings.append(
            (
                Direction(params[base], params[base + 1]),
                Direction(params[base + 2], params[base + 3]),
            )
        )
    return tuple(settings)


def _family_value(compiled: CompiledNetwork, family: str, settings) -> float:
    d = compiled.distribution(settings)
    if family == "linear":
        return linear_value(*linear_correlators(d))
    if family == "trilocal":
        return trilocal_all(d).max_lhs
    return nlocal_all(d, compiled.n_extreme).max_lhs


def _validate_family(net, family: str) -> None:
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if isinstance(net, LinearNetwork):
        if family != "linear":
            raise ValueError("linear networks support only the 'linear' family")
    elif isinstance(net, NonlinearNetwork):
        if family == "linear":
            raise ValueError("non-linear networks do not support the 'linear' family")
        if family == "trilocal" and net.n != 3:
            raise ValueError("the trilocal family needs a three-source network")
    else:
        raise TypeError(f"unsupported network type {type(net).__name__}")


def _canonical_starts(n_params: int) -> list[np.ndarray]:
    """All-z settings, then the z-x plane pair at +/- pi/4 for every party."""
    all_z = np.zeros(n_params)
    zx = np.tile([math.pi / 4.0, 0.0, math.pi / 4.0, math.pi], n_params // 4)
    return [all_z, zx]


def _latin_hypercube(rng: np.random.Generator, samples: int, dims: int) -> np.ndarray:
    """Stratified unit-cube design: one point per stratum in every dimension."""
    if samples <= 0:
        return np.empty((0, dims))
    grid = np.empty((samples, dims))
    for j in range(dims):
        perm = rng.permutation(samples)
        grid[:, j] = (perm + rng.random(samples)) / samples
    return grid


def _nelder_mead_max(objective, x0: np.ndarray, max_iters: int, tolerance: float):
    """Standard simplex maximization; returns (best_params, best_value)."""
    dim = x0.shape[0]
    step = 0.4
    simplex = [np.array(x0, dtype=float)]
    for i in range(dim):
        vertex = np.array(x0, dtype=float)
        vertex[i] += step
        simplex.append(vertex)
    simplex = np.array(simplex)
    values = np.array([objective(v) for v in simplex])

    for _ in range(max_iters):
        order = np.argsort(-values, kind="stable")
        simplex, values = simplex[order], values[order]
        if values[0] - values[-1] < tolerance:
            break
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]

        reflected = centroid + (centroid - worst)
        f_reflected = objective(reflected)
        if f_reflected > values[0]:
            expanded = centroid + 2.0 * (centroid - worst)
            f_expanded = objective(expanded)
            if f_expanded > f_reflected:
                simplex[-1], values[-1] = expanded, f_expanded
            else:
                simplex[-1], values[-1] = reflected, f_reflected
            continue
        if f_reflected > values[-2]:
            simplex[-1], values[-1] = reflected, f_reflected
            continue
        contracted = centroid + 0.5 * (worst - centroid)
        f_contracted = objective(contracted)
        if f_contracted > values[-1]:
            simplex[-1], values[-1] = contracted, f_contracted
            continue
        best = simplex[0]
        for i in range(1, dim + 1):
            simplex[i] = best + 0.5 * (simplex[i] - best)
            values[i] = objective(simplex[i])

    k = int(np.argmax(values))
    return simplex[k], float(values[k])


def maximize(net, family: str, cfg: OptimizeConfig = OptimizeConfig()) -> OptimumResult:
    """Maximize the family's left-hand side over all extreme measurement angles.

    Deterministic given the configuration seed; restarts are merged by
    index, and the reported value is re-evaluated at the folded best
    settings.
    """
    _validate_family(net, family)
    compiled = compile_network(net)
    n_params = 4 * compiled.n_extreme

    def objective(params: np.ndarray) -> float:
        folded = _fold_angles(params)
        return _family_value(compiled, family, _params_to_settings(folded))

    starts = _canonical_starts(n_params)[: cfg.restarts]
    extra = cfg.restarts - len(starts)
    if extra > 0:
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
        unit = _latin_hypercube(rng, extra, n_params)
        lo = np.tile([cfg.theta_bounds[0], cfg.phi_bounds[0]], n_params // 2)
        hi = np.tile([cfg.theta_bounds[1], cfg.phi_bounds[1]], n_params // 2)
        starts.extend(lo + (hi - lo) * unit)

    trace = []
    best_params = None
    best_value = -math.inf
    for x0 in starts:
        params, value = _nelder_mead_max(objective, x0, cfg.max_iters, cfg.tolerance)
        trace.append(value)
        if value > best_value:
            best_value = value
            best_params = params
    if best_params is None or not math.isfinite(best_value):
        raise RuntimeError("optimization budget exhausted without a finite value")

    folded = _fold_angles(best_params)
    settings = _params_to_settings(folded)
    return OptimumResult(
        best_value=_family_value(compiled, family, settings),
        best_settings=settings,
        trace=tuple(trace),
    )


def grid_scan(builder, grid, cfg: OptimizeConfig = OptimizeConfig()) -> dict:
    """Run ``maximize`` at every lattice point of a state-family scan.

    ``builder(point)`` returns the (network, family) pair for one lattice
    point; the result maps each point to its best value.
    """
    points = list(grid)
    if not points:
        raise ValueError("grid_scan needs a non-empty lattice")
    results = {}
    for point in points:
        net, family = builder(point)
        results[point] = maximize(net, family, cfg).best_value
    return results
