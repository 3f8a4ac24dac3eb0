"""Quantum correlations in source-independent networks with fixed-input intermediate parties.

The package simulates linear and non-linear n-local networks, evaluates
the associated non-linear Bell-type inequality families, reproduces the
closed-form violation bounds, and runs the bipartite and tripartite
entanglement-detection protocols.
"""

from . import bounds, detect, inequalities, lhv, linalg, measurements, network, optimize, states

__all__ = [
    "bounds",
    "detect",
    "inequalities",
    "lhv",
    "linalg",
    "measurements",
    "network",
    "optimize",
    "states",
]

__version__ = "0.1.0"
