"""Clique (flag) complexes of graphs, vertex and face links, and the complexes ``diamond(s)``."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ._validation import ParameterError, check_graph, check_nonnegative_int
from .graph import Graph, bits, induced_subgraph, vertex_mask

DEFAULT_UNCAPPED_MAX_N = 24
DEFAULT_CAP = 12


@dataclass(frozen=True)
class FlagComplex:
    """Faces of the clique complex of ``skeleton``, grouped by dimension.

    ``faces[k + 1]`` holds the ``k``-dimensional faces as ascending vertex
    tuples in lexicographic order, so ``faces[0] == [()]`` is the empty face.
    When ``capped`` is true the enumeration stopped at ``max_dim`` while larger
    cliques exist, and ``dim`` is only a lower bound.
    """

    skeleton: Graph
    faces: Tuple[Tuple[Tuple[int, ...], ...], ...]
    dim: int
    capped: bool = False
    _index: List[Dict[Tuple[int, ...], int]] = field(default=None, repr=False, compare=False)

    def faces_of_dim(self, k: int) -> Tuple[Tuple[int, ...], ...]:
        if k < -1 or k + 1 >= len(self.faces):
            return ()
        return self.faces[k + 1]

    def index_of(self, face: Tuple[int, ...]) -> int:
        k = len(face) - 1
        if self._index is None:
            object.__setattr__(
                self, "_index", [{f: i for i, f in enumerate(level)} for level in self.faces]
            )
        return self._index[k + 1][face]

    @property
    def f_vector(self) -> List[int]:
        """Face counts ``f_{-1}, f_0, ..., f_dim``."""
        return [len(level) for level in self.faces]

    def face_masks(self, k: int) -> List[int]:
        return [sum(1 << v for v in f) for f in self.faces_of_dim(k)]

    def check_closed(self) -> None:
        """Raise if some face has a codimension-one subface missing."""
        for k in range(1, self.dim + 1):
            lower = set(self.faces_of_dim(k - 1))
            for f in self.faces_of_dim(k):
                for t in range(len(f)):
                    if f[:t] + f[t + 1:] not in lower:
                        raise AssertionError(f"face {f} is missing the facet {f[:t] + f[t + 1:]}")


def _enumerate_cliques(g: Graph, max_size: Optional[int]):
    levels: List[List[Tuple[int, ...]]] = [[()]]
    truncated = False
    adj = g.adj

    def grow(face, cand):
        nonlocal truncated
        k = len(face)
        while len(levels) <= k:
            levels.append([])
        levels[k].append(face)
        if max_size is not None and k == max_size:
            if cand:
                truncated = True
            return
        for u in bits(cand):
            grow(face + (u,), cand & adj[u] & ~((1 << (u + 1)) - 1))

    for v in range(g.n):
        grow((v,), adj[v] & ~((1 << (v + 1)) - 1))
    return levels, truncated


def build_flag_complex(g: Graph, max_dim: Optional[int] = None, allow_large: bool = False) -> FlagComplex:
    """Enumerate every clique of ``g`` as a face, up to dimension ``max_dim``.

    Without an explicit ``max_dim`` graphs above 24 vertices are capped at
    dimension 12 unless ``allow_large`` is set.
    """
    check_graph(g)
    if max_dim is None and g.n > DEFAULT_UNCAPPED_MAX_N and not allow_large:
        max_dim = DEFAULT_CAP
    if max_dim is not None:
        max_dim = check_nonnegative_int(max_dim, "max_dim")
    levels, truncated = _enumerate_cliques(g, None if max_dim is None else max_dim + 1)
    faces = tuple(tuple(level) for level in levels)
    return FlagComplex(skeleton=g, faces=faces, dim=len(faces) - 2, capped=truncated)


def diamond(s: int) -> Graph:
    """1-skeleton of the ``s``-fold suspension of two points.

    Vertices ``2k`` and ``2k+1`` are antipodal and non-adjacent; every other
    pair is an edge.
    """
    s = check_nonnegative_int(s, "s")
    n = 2 * s + 2
    full = (1 << n) - 1
    adj = [full & ~(1 << v) & ~(1 << (v ^ 1)) for v in range(n)]
    return Graph(n, adj)


def link(g: Graph, v: int) -> Graph:
    """Link of vertex ``v``: the graph induced on its neighbours."""
    check_graph(g)
    if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v < g.n:
        raise ParameterError(f"vertex {v!r} out of range for n={g.n}")
    return induced_subgraph(g, g.adj[v])


def is_clique(g: Graph, mask: int) -> bool:
    for v in bits(mask):
        if (g.adj[v] | (1 << v)) & mask != mask:
            return False
    return True


def common_neighbourhood(g: Graph, mask: int) -> int:
    common = g.vertex_mask
    for v in bits(mask):
        common &= g.adj[v]
    return common


def link_of_face(g: Graph, f) -> Graph:
    """Link of a face: the graph induced on the common neighbours of ``f``."""
    check_graph(g)
    mask = vertex_mask(f)
    if mask & ~g.vertex_mask:
        raise ParameterError("face has vertices outside the graph")
    if not is_clique(g, mask):
        raise ParameterError("face is not a clique of the graph")
    if not mask:
        return g
    return induced_subgraph(g, common_neighbourhood(g, mask))
