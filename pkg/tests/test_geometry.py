import cmath
import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from moserlp.algebra import FieldElement
from moserlp.formats import load_points
from moserlp.geometry import (ExactPoint, Isometry, PointSet, congruence_classes, congruence_pairs, congruent,
                              dist_sq, distinct_distances)
from oracles import congruent_by_bijection, sym_distance_table, sym_points

# frozen from the sympy oracle in tests/oracles.py
SPINDLE_DISTINCT = 7
X23_IEC_3_4 = 1539
X23_IEC_BY_SIZE = {3: 668, 4: 871}

H = FieldElement(0, Fraction(1, 2))


@pytest.fixture(scope="module")
def x23():
    return load_points("x23").point_set()


@pytest.fixture(scope="module")
def spindle():
    return load_points("moser-spindle").point_set()


def triangle():
    return PointSet([ExactPoint(0), ExactPoint(1), ExactPoint(Fraction(1, 2), H)])


def test_dist_sq_examples(x23):
    assert dist_sq(x23[0], x23[1]) == 1
    assert dist_sq(x23[0], x23[3]) == 3
    assert dist_sq(x23[4], x23[4]) == 0
    assert dist_sq(0j, 1 + 1j) == 2.0


def test_mixed_modes_rejected():
    with pytest.raises(TypeError):
        dist_sq(ExactPoint(0), 1j)
    with pytest.raises(TypeError):
        PointSet([ExactPoint(0), 1j])


def test_point_set_validation():
    with pytest.raises(ValueError):
        PointSet([0j, 1e-7])
    with pytest.raises(ValueError):
        PointSet([0j, complex(float("nan"), 0)])
    with pytest.raises(ValueError):
        PointSet([ExactPoint(1), ExactPoint(1)])
    with pytest.raises(ValueError):
        PointSet([])


def test_distinct_distances(x23, spindle):
    assert distinct_distances(x23) == 27
    assert distinct_distances(triangle()) == 1
    assert distinct_distances(spindle) == SPINDLE_DISTINCT


def test_spindle_distances_against_sympy(spindle):
    table = sym_distance_table(sym_points("moser-spindle"))
    ids = spindle.distance_ids
    for (i, j), v in table.items():
        assert abs(float(v) - spindle.to_float().dist_sq_table[i][j]) < 1e-12
        for (k, l), w in table.items():
            assert (ids[i][j] == ids[k][l]) == (v == w)


def test_congruent_examples(spindle):
    X = PointSet([0j, 1 + 0j, -1 + 0j])
    iso = congruent(X, [0, 1], [0, 2])
    assert iso is not None and abs(iso(1 + 0j) - iso(0j)) == pytest.approx(1)
    T = triangle()
    ident = congruent(T, [0, 1, 2], [0, 1, 2])
    assert ident is not None and all(ident(p) in set(T.points) for p in T.points)
    # two unit equilateral triangles of the spindle
    assert congruent(spindle, [0, 1, 2], [1, 2, 3]) is not None
    with pytest.raises(ValueError):
        congruent(spindle, [0, 1], [0, 1, 2])


def test_segment_rotation_is_minus_one():
    X = PointSet([ExactPoint(0), ExactPoint(1), ExactPoint(-1)])
    iso = congruent(X, [0, 1], [0, 2])
    assert iso(X[1]) == X[2] and iso(X[0]) == X[0]
    if not iso.reflect:
        assert iso.u == ExactPoint(-1)


def test_reflection_needed():
    # a scalene triangle and its mirror image, no rotation maps one to the other
    pts = [0j, 3 + 0j, 1 + 2j, 10 + 0j, 13 + 0j, 11 - 2j]
    X = PointSet(pts)
    iso = congruent(X, [0, 1, 2], [3, 4, 5])
    assert iso is not None and iso.reflect


def test_noncongruent_same_size(x23):
    assert congruent(x23, [0, 1], [0, 3]) is None


def _random_subsets(X, k, rng, count):
    n = len(X)
    return [sorted(rng.sample(range(n), k)) for _ in range(count)]


def test_witness_validity_and_group_laws(x23):
    rng = random.Random(7)
    classes = [c for c in congruence_classes(x23, 3, 3) if len(c) >= 3]
    for cls in rng.sample(classes, 10):
        I, J, K = rng.sample(cls, 3)
        f = congruent(x23, I, J)
        g = congruent(x23, J, K)
        assert {x23.index_of(f(x23[i])) for i in I} == set(J)
        # symmetry through the inverse witness
        finv = f.inverse()
        assert {x23.index_of(finv(x23[j])) for j in J} == set(I)
        # transitivity through composition
        h = g.compose(f)
        assert {x23.index_of(h(x23[i])) for i in I} == set(K)
        assert congruent(x23, K, I) is not None


def test_distance_multiset_necessary(x23):
    rng = random.Random(3)
    ids = x23.distance_ids
    for _ in range(200):
        I, J = _random_subsets(x23, 3, rng, 2)
        if congruent(x23, I, J) is not None:
            ki = sorted(ids[a][b] for a, b in itertools.combinations(I, 2))
            kj = sorted(ids[a][b] for a, b in itertools.combinations(J, 2))
            assert ki == kj


def test_reindexing_invariance(x23):
    a = congruent(x23, [4, 9, 1], [12, 7, 2])
    b = congruent(x23, [1, 4, 9], [2, 7, 12])
    assert (a is None) == (b is None)


def test_congruence_pairs_small():
    T = triangle()
    assert len(congruence_pairs(T, 2, 2, independent_only=False)) == 2
    X = PointSet([0j, 1.1 + 0j, 0.3 + 2.7j, 4.2 + 0.4j])
    assert congruence_pairs(X, 2, 2, independent_only=False) == []


def test_congruence_pairs_chain_form(x23):
    for cls in congruence_classes(x23, 3, 3):
        assert cls == sorted(cls)
    pairs = congruence_pairs(x23, 3, 4)
    assert len(pairs) == X23_IEC_3_4
    for k, count in X23_IEC_BY_SIZE.items():
        assert len(congruence_pairs(x23, k, k)) == count


def test_congruence_pairs_all_sizes(x23):
    chain = congruence_pairs(x23)
    full = congruence_pairs(x23, form="all")
    assert len(chain) == 2324
    # every pair inside every class, over all independent subsets: the published row count
    assert len(full) == 5868
    assert set(chain) <= set(full)
    assert congruence_pairs(x23, 1, None) == chain
    with pytest.raises(ValueError):
        congruence_pairs(x23, form="star")


def test_congruence_pairs_match_bijection_oracle(spindle):
    table = sym_distance_table(sym_points("moser-spindle"))
    values = sorted(set(table.values()), key=float)
    dist = {k: values.index(v) for k, v in table.items()}
    for k in (2, 3):
        classes = congruence_classes(spindle, k, k, independent_only=False)
        for c1, c2 in itertools.combinations(classes, 2):
            assert not congruent_by_bijection(dist, c1[0], c2[0])
        for cls in classes:
            for S in cls[1:]:
                assert congruent_by_bijection(dist, cls[0], S)


def test_congruence_pairs_bad_sizes(x23):
    with pytest.raises(ValueError):
        congruence_pairs(x23, 0, 2)


coords = st.floats(min_value=-3, max_value=3, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(coords, coords), min_size=3, max_size=3),
       st.floats(min_value=0, max_value=2 * math.pi), st.booleans(), coords, coords)
def test_float_congruence_under_random_isometry(tri, angle, reflect, tx, ty):
    pts = [complex(a, b) for a, b in tri]
    if min(abs(p - q) for p, q in itertools.combinations(pts, 2)) < 0.05:
        return
    u = cmath.exp(1j * angle)
    iso = Isometry(u, complex(tx, ty), reflect)
    image = [iso(p) for p in pts]
    all_pts = pts + image
    if min(abs(p - q) for p, q in itertools.combinations(all_pts, 2)) < 0.05:
        return
    X = PointSet(all_pts)
    w = congruent(X, [0, 1, 2], [3, 4, 5])
    assert w is not None
    for i in range(3):
        assert min(abs(w(pts[i]) - q) for q in image) <= 1e-9
