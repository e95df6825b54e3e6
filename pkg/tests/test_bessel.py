import math
import pathlib

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from moserlp.bessel import (EPS_J, FIRST_J1_ZERO, WeightedBesselSum, certified_min, j0, j1, largest_j1_zero_below,
                            tail_bound)
from moserlp.certificate import parse_certificate
from moserlp.formats import fixture_path, load_points
from oracles import mp_j0, mp_j1, mp_j1_zero

ORACLE = pathlib.Path(__file__).parent / "data" / "bessel_oracle.npz"
J0_FIRST_ZERO = 2.404825557695773  # mpmath.besseljzero(0, 1)


@pytest.fixture(scope="module")
def oracle():
    if not ORACLE.exists():
        pytest.skip("run tests/make_bessel_oracle.py first")
    return np.load(ORACLE)


@pytest.fixture(scope="module")
def table2():
    X = load_points("x23").point_set()
    cert = parse_certificate(fixture_path("table2-partial-cert").read_text())
    return cert.weighted_sum(X)


def test_examples():
    assert j0(0.0) == pytest.approx(1, abs=1e-15)
    assert j1(0.0) == 0
    assert abs(j0(J0_FIRST_ZERO)) < 1e-12
    assert isinstance(j0(1.5), float)
    assert j0(np.array([0.0, 1.0])).shape == (2,)


@pytest.mark.parametrize("bad", [-1e-3, 1e7 * 1.01, float("nan"), float("inf")])
def test_domain(bad):
    with pytest.raises(ValueError):
        j0(bad)
    with pytest.raises(ValueError):
        j1(bad)


def test_against_frozen_oracle(oracle):
    x = oracle["x"]
    assert x.size == 100_000 and x.min() >= 0 and x.max() <= 1e4
    assert np.max(np.abs(j0(x) - oracle["j0"])) < EPS_J
    assert np.max(np.abs(j1(x) - oracle["j1"])) < EPS_J


def test_frozen_oracle_is_live(oracle):
    rng = np.random.default_rng(5)
    for i in rng.choice(oracle["x"].size, 60, replace=False):
        x = float(oracle["x"][i])
        assert abs(float(mp_j0(x)) - oracle["j0"][i]) < 1e-16
        assert abs(float(mp_j1(x)) - oracle["j1"][i]) < 1e-16


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0, max_value=1e6))
def test_live_oracle_and_bounds(x):
    a, b = j0(x), j1(x)
    assert abs(a - float(mp_j0(x))) < EPS_J
    assert abs(b - float(mp_j1(x))) < EPS_J
    assert abs(a) <= 1 and abs(b) <= 0.5819 + 1e-4


def test_zero_examples():
    assert largest_j1_zero_below(1000) == pytest.approx(999.81148, abs=1e-4)
    assert largest_j1_zero_below(4) == pytest.approx(float(mp_j1_zero(1)), abs=1e-8)
    assert FIRST_J1_ZERO == pytest.approx(float(mp_j1_zero(1)), abs=1e-15)
    with pytest.raises(LookupError):
        largest_j1_zero_below(3)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=3.9, max_value=5e4))
def test_zero_is_largest(x):
    z = largest_j1_zero_below(x)
    k = int(round((z / math.pi) - 0.25))
    assert z == pytest.approx(float(mp_j1_zero(k)), abs=1e-8)
    assert z <= x < float(mp_j1_zero(k + 1))


def test_weighted_sum_validation():
    with pytest.raises(ValueError):
        WeightedBesselSum(1.0, 0.0, ((1.0, 0.0),))
    with pytest.raises(ValueError):
        WeightedBesselSum(1.0, 0.0, ((float("nan"), 1.0),))
    W = WeightedBesselSum(0.5, 0.25, ((-0.5, 2.0),))
    assert W.abs_coef_sum == 1.0 and W.lipschitz == 1.5 and W.curvature == 2.5
    assert float(W(0.0)) == pytest.approx(0.25)


def test_constant_sum():
    W = WeightedBesselSum(0.0, 1.0)
    rep = certified_min(W, 50.0, 0.1)
    assert rep.certified_lower_bound == pytest.approx(1.0, abs=1e-12)
    assert rep.certified_lower_bound <= rep.observed_min
    assert rep.tail_bound == 1.0 and rep.tail_zero is None


def test_bad_arguments():
    W = WeightedBesselSum(1.0, 0.0)
    with pytest.raises(ValueError):
        certified_min(W, 0.0, 0.1)
    with pytest.raises(ValueError):
        certified_min(W, 10.0, -1.0)
    with pytest.raises(ValueError):
        tail_bound(W, 100.0, coef=0.5)
    with pytest.raises(ValueError):
        tail_bound(W, 100.0, scale_floor=2.0)


sums = st.builds(
    WeightedBesselSum,
    st.floats(-1, 1),
    st.floats(-1, 1),
    st.lists(st.tuples(st.floats(-1, 1), st.floats(0.2, 3)), max_size=4).map(tuple),
)


@settings(max_examples=40, deadline=None)
@given(sums)
def test_certified_bound_is_a_lower_bound(W):
    T = 30.0
    rep = certified_min(W, T, 0.05)
    assert rep.certified_lower_bound <= rep.observed_min
    dense = np.linspace(0, T, 60001)
    assert float(np.min(W(dense))) >= rep.certified_lower_bound
    # refining the step never loses more than the evaluation budget
    fine = certified_min(W, T, 0.01)
    assert fine.certified_lower_bound >= rep.certified_lower_bound - 4 * W.abs_coef_sum * EPS_J - 1e-12


@settings(max_examples=30, deadline=None)
@given(sums, st.floats(20, 500))
def test_tail_spot_check(W, T):
    tb, _, _ = tail_bound(W, T)
    rng = np.random.default_rng(1)
    t = rng.uniform(T, 2 * T, 100)
    assert np.all(W(t) >= tb)


def test_coarse_refine_matches_plain():
    W = WeightedBesselSum(0.8, 0.3, ((-0.4, 1.7), (0.2, 0.45)))
    plain = certified_min(W, 200.0, 1e-3)
    coarse = certified_min(W, 200.0, 1e-3, coarse_step=0.05)
    assert coarse.observed_min == pytest.approx(plain.observed_min, abs=1e-9)
    assert coarse.certified_lower_bound <= coarse.observed_min
    assert coarse.certified_lower_bound >= plain.certified_lower_bound - 1e-6


def test_table2_scalars(table2):
    assert table2.abs_coef_sum == pytest.approx(1.93062, abs=1e-4)
    assert table2.const_term == pytest.approx(1.059383649998022)
    tb, s, _ = tail_bound(table2, 1e4, scale_floor=0.1, coef=2.0)
    assert s == pytest.approx(999.81148, abs=1e-4)
    assert tb == pytest.approx(1.00892, abs=1e-3)


def test_table2_short_interval(table2):
    rep = certified_min(table2, 10.0, 1e-4)
    assert rep.observed_min == pytest.approx(0.99995003, abs=1e-6)
    assert rep.argmin == pytest.approx(3.77488, abs=1e-3)
    assert rep.certified_lower_bound <= rep.observed_min
    assert "certified_lower_bound" in rep.to_text()


def test_tail_before_first_zero():
    W = WeightedBesselSum(0.5, 2.0, ((0.25, 1.0),))
    tb, s, coef = tail_bound(W, 1.0)
    assert s == 0.0 and tb == pytest.approx(2.0 - 0.75 * (1 + EPS_J))
