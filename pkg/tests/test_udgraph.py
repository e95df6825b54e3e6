import itertools
import time
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from moserlp.formats import load_points
from moserlp.geometry import PointSet
from moserlp.udgraph import (CapacityError, UnitDistanceGraph, build_udg, fractional_chromatic,
                             geometric_fractional_chromatic, independent_sets, mask_members)
from oracles import brute_independent_sets, float_fractional_chromatic

SPINDLE_ATOMS = 18  # brute force over 2^7 subsets


@pytest.fixture(scope="module")
def spindle():
    return load_points("moser-spindle").point_set()


@pytest.fixture(scope="module")
def x23():
    return load_points("x23").point_set()


def test_build_udg_counts(spindle, x23):
    assert len(build_udg(spindle).edges) == 11
    assert len(build_udg(x23).edges) == 47
    assert len(build_udg(PointSet([0j, 2 + 0j])).edges) == 0


def test_ie2_count_consistency(x23):
    n = len(x23)
    assert n * (n - 1) // 2 - len(build_udg(x23).edges) == 206


def test_independent_sets_counts(spindle, x23):
    G = build_udg(spindle)
    assert independent_sets(G) == brute_independent_sets(7, G.edges)
    assert len(independent_sets(G)) == SPINDLE_ATOMS
    assert len(independent_sets(UnitDistanceGraph.from_edges(3, []))) == 8
    t = time.perf_counter()
    assert len(independent_sets(build_udg(x23))) == 13552
    assert time.perf_counter() - t < 1.0


def test_capacity():
    with pytest.raises(CapacityError):
        independent_sets(UnitDistanceGraph.from_edges(31, []))
    with pytest.raises(CapacityError):
        UnitDistanceGraph.from_edges(64, [])


graphs = st.integers(min_value=1, max_value=9).flatmap(
    lambda n: st.tuples(st.just(n), st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
                                            .filter(lambda e: e[0] != e[1]), max_size=20)))


@settings(max_examples=80, deadline=None)
@given(graphs)
def test_independent_sets_properties(g):
    n, edges = g
    G = UnitDistanceGraph.from_edges(n, edges)
    sets = independent_sets(G)
    assert sets == sorted(sets)
    assert sets == brute_independent_sets(n, G.edges)
    family = set(sets)
    for S in sets:
        assert G.is_independent(S)
        for v in mask_members(S):
            assert S & ~(1 << v) in family
    for v in range(n):
        assert 1 << v in family


def test_fractional_chromatic_examples(spindle):
    assert fractional_chromatic(build_udg(spindle)) == Fraction(7, 2)
    K3 = UnitDistanceGraph.from_edges(3, [(0, 1), (0, 2), (1, 2)])
    K2 = UnitDistanceGraph.from_edges(2, [(0, 1)])
    assert fractional_chromatic(K3) == 3
    assert fractional_chromatic(K2) == 2


def _clique_number(n, edges):
    E = {tuple(sorted(e)) for e in edges}
    best = 1
    for k in range(2, n + 1):
        if any(all(tuple(sorted(p)) in E for p in itertools.combinations(S, 2))
               for S in itertools.combinations(range(n), k)):
            best = k
    return best


@settings(max_examples=40, deadline=None)
@given(graphs)
def test_fcn_forms_agree_and_bounds(g):
    n, edges = g
    G = UnitDistanceGraph.from_edges(n, edges)
    ineq = fractional_chromatic(G, "inequality")
    eq = fractional_chromatic(G, "equality")
    assert ineq == eq
    assert abs(float(ineq) - float_fractional_chromatic(n, G.edges)) < 1e-7
    assert _clique_number(n, G.edges) <= ineq <= n


def test_fcn_odd_cycle():
    C5 = UnitDistanceGraph.from_edges(5, [(i, (i + 1) % 5) for i in range(5)])
    assert fractional_chromatic(C5) == Fraction(5, 2)


def test_fcn_bad_form():
    with pytest.raises(ValueError):
        fractional_chromatic(UnitDistanceGraph.from_edges(2, []), "both")


def test_gfcn(spindle):
    tri = load_points("k3").point_set()
    assert geometric_fractional_chromatic(tri, 2) == 3
    chi_f = fractional_chromatic(build_udg(spindle))
    values = [geometric_fractional_chromatic(spindle, k) for k in (1, 2, 3)]
    assert all(v >= chi_f for v in values)
    assert values == sorted(values)
    with pytest.raises(ValueError):
        geometric_fractional_chromatic(spindle.to_float(), 2)
