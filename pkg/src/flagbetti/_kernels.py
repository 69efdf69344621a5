"""Compiled inner loops over vertex subsets.

Vertex sets are int64 bitmasks, which limits these kernels to graphs on at
most 62 vertices; callers enforce much tighter guards.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit(cache=True, nogil=True)
def _lowbit_index(x):
    i = 0
    while not (x >> i) & 1:
        i += 1
    return i


@njit(cache=True, nogil=True)
def _components(adj, w):
    remaining = w
    count = 0
    while remaining:
        frontier = remaining & -remaining
        comp = np.int64(0)
        while frontier:
            comp |= frontier
            nxt = np.int64(0)
            f = frontier
            while f:
                low = f & -f
                nxt |= adj[_lowbit_index(low)]
                f ^= low
            frontier = nxt & remaining & ~comp
        remaining &= ~comp
        count += 1
    return count


@njit(cache=True, nogil=True)
def _is_cone(adj, w):
    f = w
    while f:
        low = f & -f
        v = _lowbit_index(low)
        if (adj[v] | low) & w == w:
            return True
        f ^= low
    return False


@njit(cache=True, nogil=True)
def _rank_mod_p(a, p):
    rows, cols = a.shape
    r = 0
    for col in range(cols):
        if r == rows:
            break
        piv = -1
        for i in range(r, rows):
            if a[i, col] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(cols):
                t = a[r, j]
                a[r, j] = a[piv, j]
                a[piv, j] = t
        if p != 2:
            # Fermat inverse of the pivot
            inv = 1
            base = a[r, col]
            e = p - 2
            while e:
                if e & 1:
                    inv = inv * base % p
                base = base * base % p
                e >>= 1
            for j in range(cols):
                a[r, j] = a[r, j] * inv % p
        for i in range(r + 1, rows):
            factor = a[i, col]
            if factor != 0:
                if p == 2:
                    for j in range(col, cols):
                        a[i, j] ^= a[r, j]
                else:
                    for j in range(col, cols):
                        a[i, j] = (a[i, j] - factor * a[r, j]) % p
        r += 1
    return r


@njit(cache=True, nogil=True)
def hochster_range(n, adj, edge_masks, hi_masks, hi_dim_off, facet_idx, facet_off, p, lo, hi, out):
    """Accumulate ``out[i, j] += dim H~_{j-i-1}(Delta|W)`` for masks ``lo <= W < hi``.

    ``edge_masks`` lists the edges of the graph.  Faces of dimension ``k >= 2``
    are ``hi_masks[hi_dim_off[k-2]:hi_dim_off[k-1]]``; the facet indices of the
    ``t``-th such face (into the dimension ``k-1`` list) start at
    ``facet_idx[facet_off[k-2] + t*(k+1)]``.
    """
    n_edges = edge_masks.shape[0]
    n_hi_dims = hi_dim_off.shape[0] - 1
    max_faces = n_edges
    for k in range(n_hi_dims):
        c = hi_dim_off[k + 1] - hi_dim_off[k]
        if c > max_faces:
            max_faces = c
    # local position of each face inside W for the current and previous dimension
    loc_prev = np.full(max(max_faces, 1), -1, np.int64)
    loc_cur = np.full(max(max_faces, 1), -1, np.int64)
    members = np.empty(max(max_faces, 1), np.int64)
    for w in range(lo, hi):
        w = np.int64(w)
        if w == 0:
            out[0, 0] += 1
            continue
        m = _popcount(w)
        if _is_cone(adj, w):
            continue
        comps = _components(adj, w)
        if comps > 1:
            out[m - 1, m] += comps - 1
        if m < 4:
            # H~_1 and above need at least four vertices
            continue
        # edges inside W
        a_prev = 0
        for e in range(n_edges):
            if edge_masks[e] & ~w == 0:
                loc_prev[e] = a_prev
                a_prev += 1
            else:
                loc_prev[e] = -1
        rank_prev = m - comps  # rank of the map out of 1-faces
        dim_prev_faces = a_prev
        for k in range(2, n_hi_dims + 3):
            if k - 2 < n_hi_dims:
                base = hi_dim_off[k - 2]
                count = hi_dim_off[k - 1] - base
            else:
                base = 0
                count = 0
            a_cur = 0
            for t in range(count):
                if hi_masks[base + t] & ~w == 0:
                    loc_cur[t] = a_cur
                    members[a_cur] = t
                    a_cur += 1
                else:
                    loc_cur[t] = -1
            rank_cur = 0
            if a_cur > 0:
                mat = np.zeros((a_cur, dim_prev_faces), np.int64)
                foff = facet_off[k - 2]
                for row in range(a_cur):
                    t = members[row]
                    for q in range(k + 1):
                        col = loc_prev[facet_idx[foff + t * (k + 1) + q]]
                        if p == 2:
                            mat[row, col] = 1
                        else:
                            mat[row, col] = 1 if q % 2 == 0 else p - 1
                rank_cur = _rank_mod_p(mat, p)
            h = dim_prev_faces - rank_prev - rank_cur
            if h > 0:
                out[m - k, m] += h
            if a_cur == 0:
                break
            for t in range(count):
                loc_prev[t] = loc_cur[t]
            dim_prev_faces = a_cur
            rank_prev = rank_cur
    return out


@njit(cache=True, nogil=True)
def first_row_range(adj, lo, hi, out):
    """Accumulate ``out[|W|] += components(W) - 1`` over masks ``lo <= W < hi``."""
    for w in range(max(lo, 1), hi):
        w = np.int64(w)
        out[_popcount(w)] += _components(adj, w) - 1
    return out


@njit(cache=True, nogil=True)
def first_row_fixed_size(adj, n, size):
    """Sum of ``components(W) - 1`` over all ``W`` with ``|W| = size`` (Gosper's hack)."""
    total = 0
    if size == 0 or size > n:
        return total
    w = np.int64((1 << size) - 1)
    limit = np.int64(1) << n
    while w < limit:
        total += _components(adj, w) - 1
        c = w & -w
        r = w + c
        w = (((r ^ w) >> 2) // c) | r
    return total
