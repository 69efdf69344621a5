"""Reduced simplicial homology of flag complexes over prime fields."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ._validation import FlagBettiError, check_graph, check_prime
from .flag_complex import FlagComplex, build_flag_complex
from .graph import Graph, component_masks


class CappedComplexError(FlagBettiError):
    """Homology was requested for a complex whose faces were capped."""


@dataclass(frozen=True)
class HomologyProfile:
    """``dims[r]`` is the dimension of reduced homology in degree ``r``."""

    dims: Dict[int, int]
    field_char: int = 2

    def __getitem__(self, r):
        return self.dims.get(r, 0)

    def nonzero_degrees(self) -> List[int]:
        return [r for r, d in sorted(self.dims.items()) if d]


@dataclass(frozen=True)
class BoundaryMatrix:
    """Sparse boundary map: ``columns[j]`` lists ``(row, coefficient)`` pairs.

    Coefficients are already reduced mod ``field_char``.
    """

    n_rows: int
    n_cols: int
    field_char: int
    columns: Tuple[Tuple[Tuple[int, int], ...], ...]

    @classmethod
    def from_dense(cls, matrix, field_char: int = 2) -> "BoundaryMatrix":
        field_char = check_prime(field_char)
        a = np.asarray(matrix, dtype=np.int64) % field_char
        if a.ndim != 2:
            raise ValueError("matrix must be two-dimensional")
        cols = tuple(
            tuple((int(r), int(a[r, j])) for r in np.flatnonzero(a[:, j])) for j in range(a.shape[1])
        )
        return cls(a.shape[0], a.shape[1], field_char, cols)

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.n_rows, self.n_cols), dtype=np.int64)
        for j, col in enumerate(self.columns):
            for r, c in col:
                a[r, j] = c
        return a


def boundary_matrix(c: FlagComplex, k: int, field_char: int = 2) -> BoundaryMatrix:
    """Matrix of the boundary map from ``k``-faces to ``(k-1)``-faces.

    ``k = 0`` gives the augmentation onto the empty face.
    """
    field_char = check_prime(field_char)
    upper = c.faces_of_dim(k)
    lower = c.faces_of_dim(k - 1)
    cols = []
    for f in upper:
        entries = []
        for t in range(len(f)):
            sign = 1 if t % 2 == 0 else field_char - 1
            entries.append((c.index_of(f[:t] + f[t + 1:]), sign % field_char))
        cols.append(tuple(sorted(entries)))
    return BoundaryMatrix(len(lower), len(upper), field_char, tuple(cols))


def gf2_rank(vectors: Sequence[int]) -> int:
    """Rank over GF(2) of integer bitset vectors."""
    pivots: Dict[int, int] = {}
    rank = 0
    for x in vectors:
        while x:
            top = x.bit_length() - 1
            other = pivots.get(top)
            if other is None:
                pivots[top] = x
                rank += 1
                break
            x ^= other
    return rank


def dense_rank_mod_p(matrix, p: int) -> int:
    """Rank of an integer matrix over GF(p) by row reduction."""
    a = np.array(matrix, dtype=np.int64) % p
    if a.size == 0:
        return 0
    rows, cols = a.shape
    r = 0
    for col in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, col])
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, col]), -1, p)
        a[r] = a[r] * inv % p
        below = a[r + 1:, col]
        hit = np.flatnonzero(below)
        if hit.size:
            idx = r + 1 + hit
            a[idx] = (a[idx] - np.outer(a[idx, col], a[r])) % p
        r += 1
    return r


def rank_gf(m: BoundaryMatrix) -> int:
    """Rank of ``m`` over GF(``m.field_char``)."""
    if m.field_char == 2:
        return gf2_rank([sum(1 << r for r, c in col if c & 1) for col in m.columns])
    return dense_rank_mod_p(m.to_dense(), m.field_char)


def _gf2_boundary_rank(c: FlagComplex, k: int) -> int:
    vecs = []
    for f in c.faces_of_dim(k):
        v = 0
        for t in range(len(f)):
            v |= 1 << c.index_of(f[:t] + f[t + 1:])
        vecs.append(v)
    return gf2_rank(vecs)


def reduced_homology_dims(c: FlagComplex, field_char: int = 2) -> HomologyProfile:
    """Reduced Betti numbers ``r = -1 .. dim`` from the augmented chain complex."""
    field_char = check_prime(field_char)
    if c.capped:
        raise CappedComplexError("faces capped: homology needs the full face enumeration")
    f = c.f_vector
    top = len(f) - 2
    ranks = [0] * (top + 3)  # ranks[k + 1] = rank of the map out of k-faces
    for k in range(0, top + 1):
        if k == 0:
            ranks[1] = 1 if f[1] else 0
        elif field_char == 2:
            ranks[k + 1] = _gf2_boundary_rank(c, k)
        else:
            ranks[k + 1] = rank_gf(boundary_matrix(c, k, field_char))
    dims = {r: f[r + 1] - ranks[r + 1] - ranks[r + 2] for r in range(-1, top + 1)}
    return HomologyProfile(dims=dims, field_char=field_char)


def graph_homology(g: Graph, field_char: int = 2) -> HomologyProfile:
    """Reduced homology of the flag complex of ``g``."""
    return reduced_homology_dims(build_flag_complex(g, allow_large=True), field_char)


def h0_dim(g: Graph) -> int:
    """Dimension of reduced ``H_0``: components minus one, or 0 with no vertices."""
    check_graph(g)
    if g.n == 0:
        return 0
    return len(component_masks(g)) - 1
