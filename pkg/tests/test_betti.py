import itertools
import math
import os
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from flagbetti._validation import CapacityError, ParameterError
from flagbetti.betti import (
    BettiTable,
    betti_table,
    betti_table_reference,
    first_row,
    first_row_closed_form,
    first_row_enumerated,
    first_row_profile,
    regularity_bounds_check,
    reisner_is_cm,
    rho_k,
    ring_invariants,
)
from flagbetti.flag_complex import diamond
from flagbetti.graph import Graph, SampleParams, complete_graph, cycle_census, cycle_graph, empty_graph, path_graph, sample_graph

from conftest import DATA, graphs

C4 = {(0, 0): 1, (1, 2): 2, (2, 4): 1}


def reference_table():
    with open(os.path.join(DATA, "reference_table_n18.json")) as fh:
        return BettiTable.from_json(fh.read())


def test_known_tables():
    assert betti_table(cycle_graph(4)).entries == C4
    assert betti_table(path_graph(3)).entries == {(0, 0): 1, (1, 2): 1}
    assert betti_table(empty_graph(3)).entries == {(0, 0): 1, (1, 2): 3, (2, 3): 2}
    for n in range(0, 7):
        assert betti_table(complete_graph(n)).entries == {(0, 0): 1}


def test_diamond_table_is_koszul():
    # the cocktail-party graph gives a complete intersection of s+1 quadrics
    for s in range(4):
        t = betti_table(diamond(s))
        expected = {(i, 2 * i): math.comb(s + 1, i) for i in range(s + 2)}
        assert t.entries == expected


def test_size_guard():
    g = sample_graph(SampleParams(23, 0.3, 0, 0))
    with pytest.raises(CapacityError):
        betti_table(g)
    with pytest.raises(CapacityError):
        betti_table(sample_graph(SampleParams(27, 0.3, 0, 0)), allow_large=True)


def test_allow_large_warns():
    g = sample_graph(SampleParams(23, 0.1, 0, 0))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        t = betti_table(g, allow_large=True)
    assert caught and t[(0, 0)] == 1


@given(graphs(max_n=8), st.sampled_from([2, 3]))
def test_kernel_matches_reference(g, p):
    assert betti_table(g, p).entries == betti_table_reference(g, p).entries


@given(graphs(max_n=10))
def test_table_invariants(g):
    t = betti_table(g)
    assert t[(0, 0)] == 1
    for (i, j), v in t.entries.items():
        assert v > 0 and i <= g.n and (j >= i or (i, j) == (0, 0))
        assert j <= 2 * i
    assert not t.koszul_violations()


@given(graphs(max_n=9))
def test_partition_independent(g):
    assert betti_table(g, n_jobs=1).entries == betti_table(g, n_jobs=3).entries


@given(graphs(min_n=2, max_n=10))
def test_first_row_matches_table(g):
    t = betti_table(g)
    for i in range(1, g.n):
        assert first_row(g, i) == t[(i, i + 1)]
    assert first_row_profile(g) == [t[(i, i + 1)] for i in range(1, g.n)]


def test_first_row_examples():
    c4 = cycle_graph(4)
    assert first_row(c4, 1) == 2
    assert first_row(c4, 2) == 0
    assert first_row(c4, 3) == 0
    assert first_row_closed_form(c4, 3) == 0
    with pytest.raises(ParameterError):
        first_row(c4, 0)
    with pytest.raises(ParameterError):
        first_row(c4, 4)


def test_first_row_non_clean_too_large():
    g = Graph.from_edges(30, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 0)])
    assert not cycle_census(g)[1]
    with pytest.raises(CapacityError, match="too large"):
        first_row(g, 10)


def test_first_row_closed_form_large_clean():
    # a single cycle on 200 vertices: exact big-integer arithmetic
    g = cycle_graph(200)
    assert first_row(g, 100) == first_row_closed_form(g, 100)
    assert first_row(g, 100) > 2**64


def test_closed_form_needs_clean():
    with pytest.raises(ParameterError):
        first_row_closed_form(complete_graph(4), 1)


def test_rho_examples():
    t = reference_table()
    assert t.pdim == 17
    assert rho_k(t, 1) == Fraction(17, 18)
    assert rho_k(t, 2) == Fraction(15, 18)
    assert rho_k(betti_table(complete_graph(4)), 1) == 0
    with pytest.raises(ParameterError):
        rho_k(t, -1)


def test_regularity_bounds():
    assert regularity_bounds_check(reference_table(), 1)
    assert regularity_bounds_check(betti_table(cycle_graph(4)), 1)
    assert not regularity_bounds_check(betti_table(complete_graph(5)), 1)


def test_ring_invariants_examples():
    inv = ring_invariants(cycle_graph(4), betti_table(cycle_graph(4)))
    assert (inv.pdim, inv.reg, inv.depth, inv.krull_dim, inv.codim, inv.is_cm) == (2, 2, 2, 2, 2, True)
    e3 = empty_graph(3)
    inv = ring_invariants(e3, betti_table(e3))
    assert (inv.pdim, inv.reg, inv.depth, inv.krull_dim, inv.codim, inv.is_cm) == (2, 1, 1, 1, 2, True)
    two = Graph.from_edges(4, [(0, 1), (2, 3)])
    assert not ring_invariants(two, betti_table(two)).is_cm


def test_reisner_examples():
    assert reisner_is_cm(complete_graph(4))
    assert not reisner_is_cm(Graph.from_edges(4, [(0, 1), (2, 3)]))
    assert reisner_is_cm(cycle_graph(4))


def _all_graphs(n):
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        yield Graph.from_edges(n, [e for k, e in enumerate(pairs) if mask >> k & 1])


@pytest.mark.parametrize("n", range(1, 6))
def test_cm_tests_agree_exhaustive(n):
    for g in _all_graphs(n):
        t = betti_table(g)
        inv = ring_invariants(g, t, check_reisner=False)
        assert inv.is_cm == reisner_is_cm(g)
        assert inv.codim <= inv.pdim and inv.depth == n - inv.pdim


def test_cm_tests_agree_n7():
    for t in range(150):
        g = sample_graph(SampleParams(7 - t % 2, 0.2 + 0.15 * (t % 5), 4, t))
        # raises if pdim == codim disagrees with Reisner's criterion
        ring_invariants(g, betti_table(g))


@given(graphs(max_n=10))
def test_closed_form_equals_enumeration_on_clean(g):
    if not cycle_census(g)[1]:
        return
    for i in range(1, g.n):
        assert first_row_closed_form(g, i) == first_row_enumerated(g, i)


def test_grid_and_json():
    t = betti_table(cycle_graph(4))
    assert t.to_grid() == "   0 1 2\n0: 1 . .\n1: . 2 .\n2: . . 1\n"
    assert t.to_json() == '{"char": 2, "entries": [[0, 0, 1], [1, 2, 2], [2, 4, 1]], "n": 4}'
    assert BettiTable.from_json(t.to_json()) == t
    assert betti_table(complete_graph(4)).to_grid() == "   0\n0: 1\n"
