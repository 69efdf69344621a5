"""Labeled simple graphs stored as per-vertex adjacency bitsets.

Vertex sets are plain Python ``int`` bitmasks throughout the package: bit ``v``
is set when vertex ``v`` is a member.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Sequence, Tuple

import numpy as np

from ._validation import (
    ParameterError,
    check_nonnegative_int,
    check_probability,
    check_vertex_count,
)


def bits(mask: int) -> Iterator[int]:
    """Yield the set bit positions of ``mask`` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def vertex_mask(vertices) -> int:
    """Coerce an int bitmask or an iterable of vertices to a bitmask."""
    if isinstance(vertices, (int, np.integer)) and not isinstance(vertices, bool):
        if vertices < 0:
            raise ParameterError("vertex bitmask must be nonnegative")
        return int(vertices)
    mask = 0
    for v in vertices:
        v = check_nonnegative_int(v, "vertex")
        mask |= 1 << v
    return mask


class Graph:
    """Immutable simple graph on vertices ``0..n-1``.

    ``adj[v]`` is the bitmask of neighbours of ``v``.  Instances compare equal
    when they have the same vertex count and edge set.
    """

    __slots__ = ("_n", "_adj", "_m")

    def __init__(self, n: int, adj: Sequence[int]):
        n = check_vertex_count(n)
        if len(adj) != n:
            raise ParameterError(f"expected {n} adjacency rows, got {len(adj)}")
        adj = tuple(int(a) for a in adj)
        full = (1 << n) - 1
        total = 0
        for v, row in enumerate(adj):
            if row & ~full or row < 0:
                raise ParameterError(f"vertex {v} has neighbours outside [0, {n})")
            if row >> v & 1:
                raise ParameterError(f"self-loop at vertex {v}")
            for u in bits(row):
                if not adj[u] >> v & 1:
                    raise ParameterError(f"adjacency is not symmetric at ({u}, {v})")
            total += popcount(row)
        self._n = n
        self._adj = adj
        self._m = total // 2

    @classmethod
    def _trusted(cls, n: int, adj: Sequence[int]) -> "Graph":
        g = cls.__new__(cls)
        g._n = n
        g._adj = tuple(adj)
        g._m = sum(popcount(a) for a in g._adj) // 2
        return g

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]]) -> "Graph":
        n = check_vertex_count(n)
        adj = [0] * n
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ParameterError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ParameterError(f"self-loop at vertex {u}")
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return cls(n, adj)

    @classmethod
    def from_adjacency_matrix(cls, matrix) -> "Graph":
        a = np.asarray(matrix, dtype=bool)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ParameterError("adjacency matrix must be square")
        if (a != a.T).any() or a.diagonal().any():
            raise ParameterError("adjacency matrix must be symmetric with empty diagonal")
        return cls(a.shape[0], _rows_to_masks(a))

    @property
    def n(self) -> int:
        return self._n

    @property
    def adj(self) -> Tuple[int, ...]:
        return self._adj

    @property
    def edge_count(self) -> int:
        return self._m

    @property
    def vertex_mask(self) -> int:
        return (1 << self._n) - 1

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self._adj[u] >> v & 1)

    def degree(self, v: int) -> int:
        return popcount(self._adj[v])

    def edges(self) -> List[Tuple[int, int]]:
        """Edges ``(u, v)`` with ``u < v`` in lexicographic order."""
        return [(u, v) for u in range(self._n) for v in bits(self._adj[u] >> (u + 1) << (u + 1))]

    def non_edges(self) -> List[Tuple[int, int]]:
        full = self.vertex_mask
        out = []
        for u in range(self._n):
            missing = ~self._adj[u] & full & ~((1 << (u + 1)) - 1)
            out.extend((u, v) for v in bits(missing))
        return out

    def to_matrix(self) -> np.ndarray:
        a = np.zeros((self._n, self._n), dtype=bool)
        for u, v in self.edges():
            a[u, v] = a[v, u] = True
        return a

    def complement(self) -> "Graph":
        full = self.vertex_mask
        return Graph(self._n, [~row & full & ~(1 << v) for v, row in enumerate(self._adj)])

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and self._adj == other._adj

    def __hash__(self):
        return hash((self._n, self._adj))

    def __repr__(self):
        return f"Graph(n={self._n}, edges={self._m})"


def _rows_to_masks(a: np.ndarray) -> List[int]:
    if a.shape[0] == 0:
        return []
    packed = np.packbits(a, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def complete_graph(n: int) -> Graph:
    full = (1 << n) - 1
    return Graph(n, [full & ~(1 << v) for v in range(n)])


def empty_graph(n: int) -> Graph:
    return Graph(n, [0] * n)


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ParameterError("a cycle needs at least 3 vertices")
    return Graph.from_edges(n, [(v, (v + 1) % n) for v in range(n)])


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(v, v + 1) for v in range(n - 1)])


# --- sampling -------------------------------------------------------------


@dataclass(frozen=True)
class SampleParams:
    n: int
    p: float
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        check_vertex_count(self.n)
        check_probability(self.p)
        if not 0 <= check_nonnegative_int(self.seed, "seed") < 2**64:
            raise ParameterError("seed must fit in 64 bits")
        check_nonnegative_int(self.stream, "stream")


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def edge_uniforms(seed: int, stream: int, n: int) -> np.ndarray:
    """One uniform in [0, 1) per vertex pair, in colexicographic pair order.

    Pair ``(u, v)`` with ``u < v`` sits at index ``v*(v-1)/2 + u``, so the
    first ``C(m, 2)`` draws only involve vertices below ``m``.  The draws for
    ``(seed, stream)`` come from a Philox counter generator keyed by both
    values and do not depend on ``p``.
    """
    n = check_vertex_count(n)
    ss = np.random.SeedSequence([int(seed), int(stream)])
    rng = np.random.Generator(np.random.Philox(ss))
    return rng.random(pair_count(n))


def graph_from_uniforms(uniforms: np.ndarray, n: int, p: float) -> Graph:
    """Threshold colex-ordered pair uniforms at ``p``.

    Uses the first ``C(n, 2)`` entries, so a longer draw can be reused for
    every smaller ``n`` and every ``p`` (nested coupling).
    """
    p = check_probability(p)
    n = check_vertex_count(n)
    m = pair_count(n)
    if len(uniforms) < m:
        raise ParameterError(f"need {m} uniforms for n={n}, got {len(uniforms)}")
    a = np.zeros((n, n), dtype=bool)
    if n >= 2:
        rows, cols = np.tril_indices(n, -1)
        hit = np.asarray(uniforms[:m]) < p
        a[rows[hit], cols[hit]] = True
        a |= a.T
    return Graph._trusted(n, _rows_to_masks(a))


def sample_graph(params: SampleParams) -> Graph:
    """Draw ``G(n, p)`` reproducibly from ``(seed, stream)``."""
    if not isinstance(params, SampleParams):
        raise ParameterError("sample_graph expects SampleParams")
    u = edge_uniforms(params.seed, params.stream, params.n)
    return graph_from_uniforms(u, params.n, params.p)


# --- structure ------------------------------------------------------------


def induced_subgraph(g: Graph, s) -> Graph:
    """Subgraph induced on ``s``, relabelled ``0..|s|-1`` in ascending order."""
    mask = vertex_mask(s)
    if mask & ~g.vertex_mask:
        raise ParameterError("vertex set is not contained in the graph")
    members = list(bits(mask))
    pos = {v: i for i, v in enumerate(members)}
    adj = []
    for v in members:
        row = 0
        for u in bits(g.adj[v] & mask):
            row |= 1 << pos[u]
        adj.append(row)
    return Graph._trusted(len(members), adj)


def component_masks(g: Graph, within: int | None = None) -> List[int]:
    """Vertex bitmasks of the connected components of ``g`` restricted to ``within``."""
    remaining = g.vertex_mask if within is None else within
    adj = g.adj
    comps = []
    while remaining:
        frontier = remaining & -remaining
        comp = 0
        while frontier:
            comp |= frontier
            nxt = 0
            for v in bits(frontier):
                nxt |= adj[v]
            frontier = nxt & remaining & ~comp
        comps.append(comp)
        remaining &= ~comp
    return comps


def connected_components(g: Graph) -> Tuple[int, List[int]]:
    """Return ``(count, labels)`` with component ids numbered by smallest vertex."""
    labels = [0] * g.n
    comps = component_masks(g)
    for cid, comp in enumerate(comps):
        for v in bits(comp):
            labels[v] = cid
    return len(comps), labels


def two_core(g: Graph, within: int | None = None, k: int = 2) -> int:
    """Mask of the ``k``-core: repeatedly strip vertices of degree below ``k``."""
    alive = g.vertex_mask if within is None else within
    adj = g.adj
    changed = True
    while changed:
        changed = False
        for v in bits(alive):
            if popcount(adj[v] & alive) < k:
                alive &= ~(1 << v)
                changed = True
    return alive


def cycle_census(g: Graph) -> Tuple[List[int], bool]:
    """Cycles of a graph whose components each carry at most one cycle.

    Returns ``(cycles, clean)``.  ``cycles`` holds one vertex bitmask per
    unicyclic component; when some component has two or more independent
    cycles ``clean`` is False and ``cycles`` is empty.
    """
    core = two_core(g)
    if not core:
        return [], True
    adj = g.adj
    for v in bits(core):
        if popcount(adj[v] & core) != 2:
            return [], False
    return component_masks(g, core), True


def cliques_up_to(g: Graph, d: int) -> List[List[Tuple[int, ...]]]:
    """Cliques of cardinality ``1..d+1``; entry ``k`` lists the ``(k+1)``-cliques.

    Each clique is an ascending tuple and every list is lexicographically sorted.
    """
    d = check_nonnegative_int(d, "d")
    out: List[List[Tuple[int, ...]]] = [[] for _ in range(d + 1)]
    adj = g.adj

    def grow(face, cand):
        out[len(face) - 1].append(face)
        if len(face) == d + 1:
            return
        for u in bits(cand):
            grow(face + (u,), cand & adj[u] & ~((1 << (u + 1)) - 1))

    for v in range(g.n):
        grow((v,), adj[v] & ~((1 << (v + 1)) - 1))
    return out


def clique_number(g: Graph) -> int:
    """Size of the largest clique (0 for the empty vertex set)."""
    best = 0
    adj = g.adj

    def grow(size, cand):
        nonlocal best
        if size > best:
            best = size
        if size + popcount(cand) <= best:
            return
        for u in bits(cand):
            grow(size + 1, cand & adj[u] & ~((1 << (u + 1)) - 1))

    for v in range(g.n):
        grow(1, adj[v] & ~((1 << (v + 1)) - 1))
    return best


# --- serialization --------------------------------------------------------


def graph_to_json(g: Graph) -> str:
    return json.dumps({"n": g.n, "edges": [list(e) for e in g.edges()]})


def graph_from_json(text: str) -> Graph:
    try:
        data = json.loads(text)
        n = data["n"]
        edges = data["edges"]
    except (ValueError, KeyError, TypeError) as exc:
        raise ParameterError(f"malformed graph JSON: {exc}") from None
    pairs = []
    for e in edges:
        if len(e) != 2:
            raise ParameterError(f"malformed edge {e!r}")
        pairs.append((int(e[0]), int(e[1])))
    return Graph.from_edges(n, pairs)


def graph_to_edgelist(g: Graph) -> str:
    lines = [f"# n={g.n}"] + [f"{u} {v}" for u, v in g.edges()]
    return "\n".join(lines) + "\n"


def graph_from_edgelist(text: str) -> Graph:
    n = None
    pairs = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("n="):
                n = int(body[2:])
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParameterError(f"malformed edge line {raw!r}")
        pairs.append((int(parts[0]), int(parts[1])))
    if n is None:
        raise ParameterError("edge list is missing its '# n=<n>' header")
    return Graph.from_edges(n, pairs)


def load_graph(path) -> Graph:
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return graph_from_json(text)
    return graph_from_edgelist(text)
