"""Betti tables of Stanley-Reisner rings of flag complexes.

Entries are computed with Hochster's formula

    beta_{i,j}(S/I) = sum over |W| = j of dim H~_{j-i-1}(Delta|_W)

by visiting every vertex subset in a compiled kernel.
"""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Tuple

import numpy as np

from . import _kernels
from ._validation import CapacityError, ParameterError, check_graph, check_nonnegative_int, check_prime
from .flag_complex import build_flag_complex, common_neighbourhood
from .graph import Graph, bits, clique_number, cycle_census, induced_subgraph, popcount
from .homology import graph_homology

BETTI_MAX_N = 22
BETTI_LARGE_MAX_N = 26
FIRST_ROW_ENUM_MAX_N = 24


@dataclass(frozen=True)
class BettiTable:
    """Sparse graded Betti numbers ``entries[(i, j)]`` of ``S/I``; zeros are omitted."""

    entries: Dict[Tuple[int, int], int]
    n: int
    field_char: int = 2

    def __post_init__(self):
        clean = {(int(i), int(j)): int(v) for (i, j), v in self.entries.items() if v}
        for (i, j), v in clean.items():
            if v < 0:
                raise ValueError(f"negative Betti number at {(i, j)}")
        object.__setattr__(self, "entries", dict(sorted(clean.items())))

    def __getitem__(self, key) -> int:
        return self.entries.get(tuple(key), 0)

    @property
    def pdim(self) -> int:
        return max(i for i, _ in self.entries)

    @property
    def reg(self) -> int:
        return max(j - i for i, j in self.entries)

    def row(self, k: int) -> List[int]:
        """``[beta_{i,i+k} for i in 0..pdim]``."""
        return [self[(i, i + k)] for i in range(self.pdim + 1)]

    def rows(self) -> List[List[int]]:
        return [self.row(k) for k in range(self.reg + 1)]

    def koszul_violations(self) -> List[Tuple[int, int]]:
        return [(i, j) for i, j in self.entries if j > 2 * i]

    def to_grid(self) -> str:
        """Macaulay2-style table: columns are ``i``, rows are ``k = j - i``, dots for zeros."""
        pdim = self.pdim
        cells = [[str(i) for i in range(pdim + 1)]]
        for k in range(self.reg + 1):
            cells.append([str(v) if v else "." for v in self.row(k)])
        widths = [max(len(r[c]) for r in cells) for c in range(pdim + 1)]
        label_w = len(str(self.reg)) + 1
        lines = []
        for idx, r in enumerate(cells):
            label = "" if idx == 0 else f"{idx - 1}:"
            lines.append(label.rjust(label_w) + " " + " ".join(x.rjust(w) for x, w in zip(r, widths)))
        return "\n".join(line.rstrip() for line in lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "char": self.field_char,
            "entries": [[i, j, v] for (i, j), v in self.entries.items()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "BettiTable":
        data = json.loads(text)
        return cls({(i, j): v for i, j, v in data["entries"]}, data["n"], data["char"])


# --- Hochster computation ---------------------------------------------------


def _kernel_inputs(g: Graph):
    c = build_flag_complex(g, allow_large=True)
    adj = np.array(g.adj, dtype=np.int64)
    edges = c.faces_of_dim(1)
    edge_masks = np.array([(1 << u) | (1 << v) for u, v in edges], dtype=np.int64)
    hi_masks: List[int] = []
    hi_dim_off = [0]
    facet_idx: List[int] = []
    facet_off = [0]
    for k in range(2, c.dim + 1):
        for f in c.faces_of_dim(k):
            hi_masks.append(sum(1 << v for v in f))
            for t in range(len(f)):
                facet_idx.append(c.index_of(f[:t] + f[t + 1:]))
        hi_dim_off.append(len(hi_masks))
        facet_off.append(len(facet_idx))
    return (
        adj,
        edge_masks.reshape(-1),
        np.array(hi_masks, dtype=np.int64),
        np.array(hi_dim_off, dtype=np.int64),
        np.array(facet_idx, dtype=np.int64),
        np.array(facet_off, dtype=np.int64),
    )


def _check_betti_size(n: int, allow_large: bool) -> None:
    if n > BETTI_MAX_N:
        if not allow_large or n > BETTI_LARGE_MAX_N:
            limit = BETTI_LARGE_MAX_N if allow_large else BETTI_MAX_N
            raise CapacityError(f"betti_table needs n <= {limit}, got n={n}")
        warnings.warn(f"enumerating 2^{n} vertex subsets; this may take a long time", RuntimeWarning)


def _split(total: int, parts: int) -> List[Tuple[int, int]]:
    parts = max(1, min(parts, total))
    step = -(-total // parts)
    return [(lo, min(lo + step, total)) for lo in range(0, total, step)]


def betti_table(g: Graph, field_char: int = 2, allow_large: bool = False, n_jobs: int = 1) -> BettiTable:
    """Graded Betti numbers of ``S/I_Delta`` for the flag complex of ``g``.

    The subset range is split into ``n_jobs`` slices evaluated on threads; the
    partial tallies are added, so the result does not depend on ``n_jobs``.
    """
    check_graph(g)
    field_char = check_prime(field_char)
    n = g.n
    _check_betti_size(n, allow_large)
    args = _kernel_inputs(g)
    total = 1 << n
    slices = _split(total, n_jobs)

    def run(bounds):
        out = np.zeros((n + 1, n + 1), dtype=np.int64)
        _kernels.hochster_range(n, *args, field_char, bounds[0], bounds[1], out)
        return out

    if len(slices) == 1:
        parts = [run(slices[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(slices)) as pool:
            parts = list(pool.map(run, slices))
    acc = sum(parts)
    entries = {(int(i), int(j)): int(acc[i, j]) for i, j in zip(*np.nonzero(acc))}
    return BettiTable(entries, n, field_char)


def betti_table_reference(g: Graph, field_char: int = 2) -> BettiTable:
    """Hochster's formula evaluated subset by subset with the Python homology code.

    Slow; used to test the compiled kernel on small graphs.
    """
    check_graph(g)
    entries: Dict[Tuple[int, int], int] = {}
    for w in range(1 << g.n):
        j = popcount(w)
        prof = graph_homology(induced_subgraph(g, w), field_char)
        for r, d in prof.dims.items():
            if d:
                key = (j - r - 1, j)
                entries[key] = entries.get(key, 0) + d
    return BettiTable(entries, g.n, field_char)


# --- first row --------------------------------------------------------------


def first_row_closed_form(g: Graph, i: int) -> int:
    """``beta_{i,i+1}`` for a graph whose components carry at most one cycle.

    Uses ``i*C(n,i+1) - E*C(n-2,i-1) + sum over cycles of C(n-|cycle|, i+1-|cycle|)``.
    """
    cycles, clean = cycle_census(g)
    if not clean:
        raise ParameterError("closed form needs every component to have at most one cycle")
    n = g.n
    value = i * math.comb(n, i + 1) - g.edge_count * _comb(n - 2, i - 1)
    for cyc in cycles:
        size = popcount(cyc)
        value += _comb(n - size, i + 1 - size)
    return value


def _comb(a: int, b: int) -> int:
    if a < 0 or b < 0 or b > a:
        return 0
    return math.comb(a, b)


def first_row_enumerated(g: Graph, i: int) -> int:
    """``beta_{i,i+1}`` by summing ``components - 1`` over all ``(i+1)``-subsets."""
    if g.n > FIRST_ROW_ENUM_MAX_N:
        raise CapacityError(f"subset enumeration needs n <= {FIRST_ROW_ENUM_MAX_N}, got n={g.n}")
    adj = np.array(g.adj, dtype=np.int64)
    return int(_kernels.first_row_fixed_size(adj, g.n, i + 1))


def first_row(g: Graph, i: int, method: str = "auto") -> int:
    """``beta_{i,i+1}(S/I_Delta)`` for ``1 <= i <= n-1``.

    ``method`` is ``"closed"``, ``"enumerate"`` or ``"auto"`` (closed form
    when the graph is clean, enumeration otherwise).
    """
    check_graph(g)
    i = check_nonnegative_int(i, "i")
    if not 1 <= i <= max(g.n - 1, 0):
        raise ParameterError(f"first_row needs 1 <= i <= n-1, got i={i}, n={g.n}")
    if method == "closed":
        return first_row_closed_form(g, i)
    if method == "enumerate":
        return first_row_enumerated(g, i)
    if method != "auto":
        raise ParameterError(f"unknown method {method!r}")
    if cycle_census(g)[1]:
        return first_row_closed_form(g, i)
    if g.n > FIRST_ROW_ENUM_MAX_N:
        raise CapacityError("graph has a component with two cycles and needs enumeration, too large")
    return first_row_enumerated(g, i)


def first_row_profile(g: Graph, method: str = "auto") -> List[int]:
    """``[beta_{i,i+1} for i in 1..n-1]``."""
    check_graph(g)
    n = g.n
    if n < 2:
        return []
    if method == "enumerate" or (method == "auto" and not cycle_census(g)[1]):
        if n > FIRST_ROW_ENUM_MAX_N:
            raise CapacityError("graph needs enumeration, too large")
        out = np.zeros(n + 1, dtype=np.int64)
        _kernels.first_row_range(np.array(g.adj, dtype=np.int64), 0, 1 << n, out)
        return [int(out[i + 1]) for i in range(1, n)]
    return [first_row_closed_form(g, i) for i in range(1, n)]


# --- derived invariants -----------------------------------------------------


def rho_k(t: BettiTable, k: int) -> Fraction:
    """Fraction of ``i`` in ``[0, pdim]`` with ``beta_{i,i+k} != 0``."""
    if isinstance(k, bool) or not isinstance(k, int) or k < 0:
        raise ParameterError(f"row index must be a nonnegative integer, got {k!r}")
    pdim = t.pdim
    nonzero = sum(1 for i in range(pdim + 1) if t[(i, i + k)])
    return Fraction(nonzero, pdim + 1)


def regularity_bounds_check(t: BettiTable, r: int) -> bool:
    return r + 1 <= t.reg <= 2 * r


@dataclass(frozen=True)
class RingInvariants:
    pdim: int
    reg: int
    depth: int
    krull_dim: int
    codim: int
    is_cm: bool


def complex_dimension(g: Graph) -> int:
    """Dimension of the flag complex: clique number minus one."""
    return clique_number(g) - 1


def ring_invariants(g: Graph, t: BettiTable, check_reisner: bool = True) -> RingInvariants:
    """Projective dimension, regularity, depth, Krull dimension, codimension and CM flag.

    With ``check_reisner`` the CM flag from ``pdim == codim`` is cross-checked
    against Reisner's criterion and a disagreement raises ``AssertionError``.
    """
    check_graph(g)
    if t.n != g.n:
        raise ParameterError("Betti table and graph have different vertex counts")
    pdim = t.pdim
    krull = complex_dimension(g) + 1
    codim = g.n - krull
    is_cm = pdim == codim
    if check_reisner:
        reisner = reisner_is_cm(g, t.field_char)
        if reisner != is_cm:
            raise AssertionError(f"pdim/codim CM test ({is_cm}) disagrees with Reisner ({reisner})")
    return RingInvariants(pdim=pdim, reg=t.reg, depth=g.n - pdim, krull_dim=krull, codim=codim, is_cm=is_cm)


def _faces(g: Graph) -> Iterable[int]:
    """Every clique of ``g`` as a bitmask, starting with the empty face."""
    adj = g.adj
    stack = [(0, g.vertex_mask)]
    while stack:
        face, cand = stack.pop()
        yield face
        for u in bits(cand):
            stack.append((face | (1 << u), cand & adj[u] & ~((1 << (u + 1)) - 1)))


def reisner_is_cm(g: Graph, field_char: int = 2) -> bool:
    """Reisner's criterion over every face, the empty face included.

    True iff each link has vanishing reduced homology below its dimension.
    """
    check_graph(g)
    field_char = check_prime(field_char)
    seen: Dict[int, bool] = {}
    for face in _faces(g):
        lk = common_neighbourhood(g, face) if face else g.vertex_mask
        ok = seen.get(lk)
        if ok is None:
            sub = induced_subgraph(g, lk)
            prof = graph_homology(sub, field_char)
            top = max(prof.dims)
            ok = all(prof.dims[r] == 0 for r in prof.dims if r < top)
            seen[lk] = ok
        if not ok:
            return False
    return True
