"""Fourier diagram calculus for GFOM / AMP iterations on Wigner matrices."""

import json as _json

from ._core import (
    BudgetError,
    ConfigError,
    Error,
    StructuralError,
    classify,
    evolve as _evolve,
    simulate as _simulate,
    star_matching_count,
    walk_decomposition,
)

__all__ = [
    "BudgetError",
    "ConfigError",
    "Error",
    "StructuralError",
    "classify",
    "evolve",
    "simulate",
    "star_matching_count",
    "walk_decomposition",
]


def _dump(x):
    return x if isinstance(x, str) else _json.dumps(x)


def evolve(program):
    """Symbolic state evolution; `program` is a dict or a JSON string."""
    return _evolve(_dump(program))


def simulate(program, n, seed=0, ensemble=None, asymptotic_onsager=False):
    """Run `program` on one n x n Wigner matrix; returns iterates as numpy arrays."""
    return _simulate(_dump(program), n, seed, _dump(ensemble or {}), asymptotic_onsager)
