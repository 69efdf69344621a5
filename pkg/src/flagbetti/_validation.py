"""Exception types and input checks shared across the package."""

from __future__ import annotations

import math
import numbers


class FlagBettiError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(FlagBettiError, ValueError):
    """An argument is outside its documented domain."""


class CapacityError(FlagBettiError):
    """The requested computation exceeds a size guard."""


class ConfigError(FlagBettiError, ValueError):
    """An experiment configuration is malformed."""


MAX_VERTICES = 4096


def check_probability(p, name="p"):
    if isinstance(p, bool) or not isinstance(p, numbers.Real):
        raise ParameterError(f"{name} must be a real number, got {p!r}")
    p = float(p)
    if math.isnan(p) or not 0.0 <= p <= 1.0:
        raise ParameterError(f"{name} must lie in [0, 1], got {p}")
    return p


def check_nonnegative_int(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ParameterError(f"{name} must be an integer, got {value!r}")
    if value < 0:
        raise ParameterError(f"{name} must be nonnegative, got {value}")
    return int(value)


def check_vertex_count(n):
    n = check_nonnegative_int(n, "n")
    if n > MAX_VERTICES:
        raise CapacityError(f"n={n} exceeds the vertex capacity {MAX_VERTICES}")
    return n


def is_prime(q):
    if q < 2:
        return False
    for d in range(2, math.isqrt(q) + 1):
        if q % d == 0:
            return False
    return True


def check_prime(q, name="field_char"):
    q = check_nonnegative_int(q, name)
    if not is_prime(q):
        raise ParameterError(f"{name} must be prime, got {q}")
    return q


def check_graph(g):
    """Return ``g`` if it is a :class:`~flagbetti.graph.Graph`, else raise."""
    from .graph import Graph

    if not isinstance(g, Graph):
        raise ParameterError(f"expected a Graph, got {type(g).__name__}")
    return g
