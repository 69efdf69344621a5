"""Exact subgraph counters and their expectations under ``G(n, p)``."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterator, List, NamedTuple, Sequence

import numpy as np

from ._validation import CapacityError, ParameterError, check_graph, check_nonnegative_int, check_probability
from .graph import Graph, bits, popcount

DENSE_SUBGRAPH_MAX_V = 12


def _low_mask(v: int) -> int:
    return (1 << (v + 1)) - 1


def diamond_configurations(g: Graph, s: int) -> Iterator[List[tuple]]:
    """Yield each induced copy of the ``s``-diamond as a list of antipodal pairs.

    A copy is ``s+1`` disjoint non-adjacent pairs with every cross-pair edge
    present.  Pairs are listed by increasing smaller vertex, so each unordered
    set of pairs is produced exactly once.
    """
    check_graph(g)
    s = check_nonnegative_int(s, "s")
    adj = g.adj
    full = g.vertex_mask

    def extend(chosen, common, last_min):
        if len(chosen) == s + 1:
            yield list(chosen)
            return
        for c in bits(common & ~_low_mask(last_min)):
            for d in bits(common & ~adj[c] & ~_low_mask(c)):
                chosen.append((c, d))
                yield from extend(chosen, common & adj[c] & adj[d], c)
                chosen.pop()

    for a in range(g.n):
        for b in bits(~adj[a] & full & ~_low_mask(a)):
            yield from extend([(a, b)], adj[a] & adj[b], a)


def count_diamonds(g: Graph, s: int) -> int:
    """Number of induced ``s``-diamond configurations (unordered sets of pairs)."""
    check_graph(g)
    s = check_nonnegative_int(s, "s")
    if s == 1:
        return _count_squares(g)
    return sum(1 for _ in diamond_configurations(g, s))


def _count_squares(g: Graph) -> int:
    # Each induced 4-cycle has two diagonals; count (diagonal, other diagonal) once.
    adj = g.adj
    full = g.vertex_mask
    total = 0
    for a in range(g.n):
        for b in bits(~adj[a] & full & ~_low_mask(a)):
            common = adj[a] & adj[b] & ~_low_mask(a)
            for c in bits(common):
                total += popcount(common & ~adj[c] & ~_low_mask(c))
    return total


def diamond_configuration_count(n: int, s: int) -> int:
    """Ways to choose ``s+1`` disjoint unordered pairs from ``n`` vertices."""
    k = 2 * s + 2
    if n < k:
        return 0
    return math.factorial(n) // (math.factorial(n - k) * 2 ** (s + 1) * math.factorial(s + 1))


def expected_diamond_count(n: int, p, s: int) -> Fraction:
    """Exact ``E[X_s]`` for ``G(n, p)``; ``float()`` it for a decimal view."""
    n = check_nonnegative_int(n, "n")
    s = check_nonnegative_int(s, "s")
    p = _exact_probability(p)
    configs = diamond_configuration_count(n, s)
    return configs * p ** (2 * s * (s + 1)) * (1 - p) ** (s + 1)


def expected_clique_count(n: int, p, k: int) -> Fraction:
    """Exact expected number of ``k``-cliques in ``G(n, p)``."""
    n = check_nonnegative_int(n, "n")
    k = check_nonnegative_int(k, "k")
    if k < 1:
        raise ParameterError("clique size must be at least 1")
    p = _exact_probability(p)
    return math.comb(n, k) * p ** math.comb(k, 2)


def _exact_probability(p) -> Fraction:
    if isinstance(p, Fraction):
        if not 0 <= p <= 1:
            raise ParameterError(f"p must lie in [0, 1], got {p}")
        return p
    return Fraction(check_probability(p))


def dense_subsets(g: Graph, v: int, s: int) -> Iterator[int]:
    """Vertex subsets ``K`` with ``2s+2 <= |K| <= v`` inducing at least ``|K|*s`` edges."""
    check_graph(g)
    v = check_nonnegative_int(v, "v")
    s = check_nonnegative_int(s, "s")
    if v > DENSE_SUBGRAPH_MAX_V:
        raise CapacityError(f"dense subgraph enumeration is limited to v <= {DENSE_SUBGRAPH_MAX_V}")
    v = min(v, g.n)
    lo = 2 * s + 2
    if v < lo:
        return
    adj = g.adj
    n = g.n

    def feasible(mask, size, edges, rest):
        # the t largest degrees into (mask | rest), summed, bound the edges
        # gained by adding any t vertices from rest
        pool = sorted((popcount(adj[u] & (rest | mask)) for u in bits(rest)), reverse=True)
        acc = edges
        for m in range(size, min(v, size + len(pool)) + 1):
            if m >= lo and acc >= m * s:
                return True
            if m - size < len(pool):
                acc += pool[m - size]
        return False

    def grow(mask, size, edges, start):
        if size >= lo and edges >= size * s:
            yield mask
        if size == v:
            return
        rest = g.vertex_mask & ~((1 << start) - 1)
        if not feasible(mask, size, edges, rest):
            return
        for u in range(start, n):
            yield from grow(mask | (1 << u), size + 1, edges + popcount(adj[u] & mask), u + 1)

    yield from grow(0, 0, 0, 0)


def count_dense_subgraphs(g: Graph, v: int, s: int) -> int:
    return sum(1 for _ in dense_subsets(g, v, s))


def connected_subsets(g: Graph, max_size: int, within: int | None = None) -> Iterator[int]:
    """Every connected vertex subset of size ``1..max_size`` exactly once.

    Enumeration extends a set only through neighbours above its smallest
    vertex that are not already adjacent to the set (the ESU scheme).
    """
    adj = g.adj
    allowed = g.vertex_mask if within is None else within

    def extend(sub, size, ext, root, nbhd):
        yield sub
        if size == max_size:
            return
        while ext:
            low = ext & -ext
            w = low.bit_length() - 1
            ext ^= low
            exclusive = adj[w] & allowed & ~nbhd & ~sub & ~_low_mask(root)
            yield from extend(sub | low, size + 1, ext | exclusive, root, nbhd | adj[w])

    for root in bits(allowed):
        start = adj[root] & allowed & ~_low_mask(root)
        yield from extend(1 << root, 1, start, root, adj[root] | (1 << root))


class VarianceEstimate(NamedTuple):
    mean: float
    variance: float
    ratio: float
    ratio_se: float


def variance_ratio_estimate(samples: Sequence[float]) -> VarianceEstimate:
    """Sample mean, unbiased variance and ``variance / mean**2`` with a jackknife SE."""
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ParameterError("need at least two samples")
    mean = float(x.mean())
    var = float(x.var(ddof=1))
    if mean == 0:
        raise ParameterError("variance ratio is undefined when the mean is zero")
    ratio = var / mean**2
    n = x.size
    se = float("nan")
    if n >= 3:
        s1 = x.sum()
        s2 = (x * x).sum()
        loo_mean = (s1 - x) / (n - 1)
        loo_var = (s2 - x * x - (n - 1) * loo_mean**2) / (n - 2)
        if np.all(loo_mean != 0):
            theta = loo_var / loo_mean**2
            se = float(math.sqrt((n - 1) / n * ((theta - theta.mean()) ** 2).sum()))
    return VarianceEstimate(mean, var, ratio, se)
