"""Sampling and density evaluation for ground distribution instances.

A ground instance is a tuple: ("gaussian", mean, var), ("poisson", rate),
("uniform", lo, hi), ("discrete", ((value, weight), ...)), ("delta", value).
Values are Python numbers, booleans, or constant-name strings.
"""

from __future__ import annotations

import math
from typing import Tuple

from .errors import InferenceError

WEIGHT_SUM_TOL = 1e-9


def check_params(g: Tuple) -> None:
    kind = g[0]
    if kind == "gaussian":
        _, mean, var = g
        _require_number(mean, "gaussian mean")
        _require_number(var, "gaussian variance")
        if var <= 0:
            raise InferenceError(f"gaussian variance must be > 0, got {var}")
    elif kind == "poisson":
        _, rate = g
        _require_number(rate, "poisson rate")
        if rate <= 0:
            raise InferenceError(f"poisson rate must be > 0, got {rate}")
    elif kind == "uniform":
        _, lo, hi = g
        _require_number(lo, "uniform lower bound")
        _require_number(hi, "uniform upper bound")
        if not hi > lo:
            raise InferenceError(f"uniform bounds must satisfy lo < hi, got [{lo}, {hi}]")
    elif kind == "discrete":
        items = g[1]
        total = 0.0
        for _, w in items:
            _require_number(w, "discrete weight")
            if w < 0:
                raise InferenceError(f"discrete weight must be >= 0, got {w}")
            total += w
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise InferenceError(f"discrete weights sum to {total}, expected 1")
    elif kind == "delta":
        pass
    else:
        raise InferenceError(f"unknown distribution kind {kind!r}")


def _require_number(v, what: str) -> None:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InferenceError(f"{what} must be numeric, got {v!r}")


def draw(g: Tuple, rng) -> object:
    check_params(g)
    kind = g[0]
    if kind == "gaussian":
        return rng.normal(g[1], math.sqrt(g[2]))
    if kind == "poisson":
        return int(rng.poisson(g[1]))
    if kind == "uniform":
        return rng.uniform(g[1], g[2])
    if kind == "discrete":
        u = rng.random()
        acc = 0.0
        items = g[1]
        for v, w in items:
            acc += w
            if u < acc:
                return v
        return items[-1][0]
    return g[1]  # delta


def density(g: Tuple, value) -> float:
    """Density for continuous kinds, probability mass for discrete kinds."""
    check_params(g)
    kind = g[0]
    if kind == "gaussian":
        _, mean, var = g
        _require_number(value, "gaussian observation")
        return math.exp(-((value - mean) ** 2) / (2.0 * var)) / math.sqrt(
            2.0 * math.pi * var
        )
    if kind == "poisson":
        rate = g[1]
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            return 0.0
        return math.exp(value * math.log(rate) - rate - math.lgamma(value + 1))
    if kind == "uniform":
        _, lo, hi = g
        _require_number(value, "uniform observation")
        return 1.0 / (hi - lo) if lo <= value <= hi else 0.0
    if kind == "discrete":
        return sum(w for v, w in g[1] if values_equal(v, value))
    return 1.0 if values_equal(g[1], value) else 0.0  # delta


def values_equal(a, b) -> bool:
    """Equality across the value kinds a draw can produce."""
    if isinstance(a, bool) or isinstance(b, bool):
        return a is b if isinstance(a, bool) and isinstance(b, bool) else False
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return a == b
    return a == b
