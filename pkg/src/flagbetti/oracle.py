"""Ground truth that does not go through induced-subcomplex homology.

``taylor_betti_table`` computes Betti numbers of ``S/I`` from the Taylor
complex of the quadratic monomial generators, one squarefree multidegree at
a time.  ``verify_extremal_lemma`` exhaustively checks the minimum vertex and
edge counts of flag complexes with nonzero reduced homology in a given degree.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from typing import Dict, List, Optional, Tuple

from ._validation import CapacityError, ParameterError, check_graph, check_nonnegative_int, check_prime
from .betti import BettiTable, betti_table
from .graph import Graph, SampleParams, bits, graph_to_json, popcount, sample_graph
from .homology import graph_homology

TAYLOR_MAX_N = 12
TAYLOR_DIRECT_MAX_GENERATORS = 22
DIRECT_STRAND_LIMIT = 10


# --- small local linear algebra (kept separate from the homology module) ---


def _rank_mod_p(rows: List[Dict[int, int]], p: int) -> int:
    """Rank of sparse row vectors ``{column: coefficient}`` over GF(p)."""
    pivots: Dict[int, Dict[int, int]] = {}
    rank = 0
    for row in rows:
        vec = {c: v % p for c, v in row.items() if v % p}
        while vec:
            col = min(vec)
            piv = pivots.get(col)
            if piv is None:
                inv = pow(vec[col], -1, p)
                pivots[col] = {c: v * inv % p for c, v in vec.items()}
                rank += 1
                break
            factor = vec[col]
            for c, v in piv.items():
                nv = (vec.get(c, 0) - factor * v) % p
                if nv:
                    vec[c] = nv
                else:
                    vec.pop(c, None)
    return rank


def _chain_homology(cells_by_degree: Dict[int, List[int]], boundary, p: int) -> Dict[int, int]:
    """Homology dimensions of a chain complex given cells per degree.

    ``boundary(cell)`` yields ``(face, sign)`` pairs in the degree below.
    """
    index = {d: {c: k for k, c in enumerate(cells)} for d, cells in cells_by_degree.items()}
    ranks: Dict[int, int] = {}
    for d, cells in cells_by_degree.items():
        below = index.get(d - 1)
        if not below:
            ranks[d] = 0
            continue
        rows = []
        for cell in cells:
            row: Dict[int, int] = {}
            for face, sign in boundary(cell):
                k = below.get(face)
                if k is not None:
                    row[k] = row.get(k, 0) + sign
            rows.append(row)
        ranks[d] = _rank_mod_p(rows, p)
    return {
        d: len(cells) - ranks.get(d, 0) - ranks.get(d + 1, 0) for d, cells in cells_by_degree.items()
    }


# --- Taylor complex --------------------------------------------------------


def _strand_direct(gens: List[int], target: int, p: int) -> Dict[int, int]:
    """Homology of the multidegree-``target`` strand of the Taylor complex.

    Cells are subsets ``T`` of ``gens`` (as index bitmasks) whose lcm, the
    union of supports, equals ``target``; the differential drops one
    generator with an alternating sign and keeps only faces of the same lcm.
    """
    k = len(gens)
    union = [0] * (1 << k)
    for t in range(1, 1 << k):
        low = t & -t
        union[t] = union[t ^ low] | gens[low.bit_length() - 1]
    cells: Dict[int, List[int]] = {}
    for t in range(1, 1 << k):
        if union[t] == target:
            cells.setdefault(popcount(t), []).append(t)

    def boundary(t):
        for pos, idx in enumerate(bits(t)):
            face = t & ~(1 << idx)
            if union[face] == target:
                yield face, (1 if pos % 2 == 0 else -1)

    return _chain_homology(cells, boundary, p)


def _strand_via_nerve(gens: List[int], target: int, p: int) -> Dict[int, int]:
    """Same strand homology through the nerve of the non-covering part.

    The strand is the relative chain complex of the full simplex on
    ``gens`` modulo the subcomplex ``Y`` of generator sets whose supports miss
    some vertex of ``target``.  ``Y`` is covered by the simplices on the
    generators avoiding each vertex, so it is homotopy equivalent to the
    nerve ``N = {S : target - S contains a generator}``, and the homology in
    Taylor degree ``i`` equals reduced homology of ``N`` in degree ``i - 2``.
    """
    def has_gen(mask):
        return any(g & ~mask == 0 for g in gens)

    verts = list(bits(target))
    faces: Dict[int, List[int]] = {}
    for r in range(len(verts) + 1):
        for combo in itertools.combinations(verts, r):
            s = sum(1 << v for v in combo)
            if has_gen(target & ~s):
                faces.setdefault(r - 1, []).append(s)

    def boundary(s):
        for pos, v in enumerate(bits(s)):
            yield s & ~(1 << v), (1 if pos % 2 == 0 else -1)

    reduced = _chain_homology(faces, boundary, p)
    return {d + 2: h for d, h in reduced.items()}


def taylor_strand_homology(gens: List[int], target: int, p: int, method: str = "auto") -> Dict[int, int]:
    gens = [g for g in gens if g & ~target == 0]
    covered = 0
    for g in gens:
        covered |= g
    if covered != target:
        return {}
    if method == "direct" or (method == "auto" and len(gens) <= DIRECT_STRAND_LIMIT):
        return _strand_direct(gens, target, p)
    if method not in ("auto", "nerve"):
        raise ParameterError(f"unknown method {method!r}")
    return _strand_via_nerve(gens, target, p)


def taylor_betti_table(g: Graph, field_char: int = 2, method: str = "auto") -> BettiTable:
    """Betti table of ``S/I`` from the Taylor complex of the non-edge monomials."""
    check_graph(g)
    field_char = check_prime(field_char)
    if g.n > TAYLOR_MAX_N:
        raise CapacityError(f"Taylor oracle is limited to n <= {TAYLOR_MAX_N}")
    gens = [(1 << u) | (1 << v) for u, v in g.non_edges()]
    if method == "direct" and len(gens) > TAYLOR_DIRECT_MAX_GENERATORS:
        raise CapacityError(f"direct Taylor complex needs at most {TAYLOR_DIRECT_MAX_GENERATORS} generators")
    entries: Dict[Tuple[int, int], int] = {(0, 0): 1}
    for target in range(1, 1 << g.n):
        for i, h in taylor_strand_homology(gens, target, field_char, method).items():
            if h:
                key = (i, popcount(target))
                entries[key] = entries.get(key, 0) + h
    table = BettiTable(entries, g.n, field_char)
    if table.koszul_violations():
        raise AssertionError(f"Taylor table violates j <= 2i: {table.koszul_violations()}")
    return table


# --- exhaustive lemma check -----------------------------------------------


def _graphs(n: int, max_edges: Optional[int] = None):
    pairs = list(itertools.combinations(range(n), 2))
    top = len(pairs) if max_edges is None else min(max_edges, len(pairs))
    for e in range(top + 1):
        for chosen in itertools.combinations(pairs, e):
            yield Graph.from_edges(n, chosen)


def _is_cocktail_party(g: Graph) -> bool:
    # complement is a perfect matching
    comp = g.complement()
    return g.n % 2 == 0 and all(comp.degree(v) == 1 for v in range(g.n))


def verify_extremal_lemma(r: int, n_max: int, field_char: int = 2) -> dict:
    """Exhaustively check the vertex and edge minima for nonzero ``H~_r``.

    Examines every labeled graph with fewer than ``2r+2`` vertices, and every
    labeled graph on up to ``n_max`` vertices with at most ``2r(r+1)`` edges.
    """
    r = check_nonnegative_int(r, "r")
    n_max = check_nonnegative_int(n_max, "n_max")
    field_char = check_prime(field_char)
    if n_max > 7:
        raise CapacityError("exhaustive enumeration is limited to n_max <= 7")
    v_bound = 2 * r + 2
    e_bound = 2 * r * (r + 1)

    def nonzero(g):
        return graph_homology(g, field_char)[r] != 0

    vertex_counter = None
    for n in range(0, min(v_bound - 1, n_max) + 1):
        for g in _graphs(n):
            if nonzero(g):
                vertex_counter = g
                break
        if vertex_counter is not None:
            break

    min_vertices = None
    min_edges = None
    edge_counter = None
    minimizers = []
    for n in range(v_bound, n_max + 1):
        for g in _graphs(n, e_bound):
            if not nonzero(g):
                continue
            if min_vertices is None or n < min_vertices:
                min_vertices = n
            if min_edges is None or g.edge_count < min_edges:
                min_edges = g.edge_count
            if g.edge_count < e_bound and edge_counter is None:
                edge_counter = g
            if n == v_bound and g.edge_count == e_bound:
                minimizers.append(g)

    non_diamond = next((g for g in minimizers if not _is_cocktail_party(g)), None)
    labelings = math.factorial(v_bound) // (2 ** (r + 1) * math.factorial(r + 1))
    sharp = non_diamond is None and len(minimizers) == labelings and n_max >= v_bound

    def claim(name, bound, witnesses, counter):
        return {
            "claim": name,
            "bound": bound,
            "witness_count": witnesses,
            "counterexample": None if counter is None else json.loads(graph_to_json(counter)),
        }

    claims = [
        claim("min_vertices", v_bound, len(minimizers), vertex_counter),
        claim("min_edges", e_bound, len(minimizers), edge_counter),
        claim("minimizers_are_diamonds", labelings, len(minimizers), non_diamond),
    ]
    return {
        "r": r,
        "n_max": n_max,
        "field_char": field_char,
        "min_vertices": min_vertices,
        "min_edges": min_edges,
        "minimizer_count": len(minimizers),
        "sharp": sharp,
        "passed": vertex_counter is None and edge_counter is None and sharp,
        "claims": claims,
    }


def cross_validate(trials: int, n_max: int, seed: int = 0, field_char: int = 2) -> dict:
    """Compare ``betti_table`` with ``taylor_betti_table`` on sampled graphs.

    Trial ``t`` uses ``p = (0.2, 0.5, 0.8)[t % 3]`` and a vertex count drawn
    uniformly from ``1..n_max``.
    """
    trials = check_nonnegative_int(trials, "trials")
    n_max = check_nonnegative_int(n_max, "n_max")
    if n_max > 8:
        raise ParameterError("cross validation is limited to n_max <= 8")
    rng = random.Random(seed)
    probs = (0.2, 0.5, 0.8)
    divergence = None
    checked = 0
    for t in range(trials):
        n = rng.randint(1, max(n_max, 1)) if n_max else 0
        p = probs[t % 3]
        g = sample_graph(SampleParams(n, p, seed, t))
        fast = betti_table(g, field_char)
        slow = taylor_betti_table(g, field_char)
        checked += 1
        if fast.entries != slow.entries:
            divergence = {
                "trial": t,
                "n": n,
                "p": p,
                "graph": json.loads(graph_to_json(g)),
                "hochster": fast.to_dict()["entries"],
                "taylor": slow.to_dict()["entries"],
            }
            break
    return {
        "claim": "hochster_equals_taylor",
        "trials": checked,
        "seed": seed,
        "field_char": field_char,
        "agree": divergence is None,
        "message": "all agree" if divergence is None else "divergence found",
        "first_divergence": divergence,
    }
