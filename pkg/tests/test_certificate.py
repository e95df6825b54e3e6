import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from moserlp.certificate import (CertificateError, DualCertificate, VerificationFailure, check_V, extract, fit_wc,
                                 format_certificate, parse_certificate, verify)
from moserlp.formats import fixture_path, load_points
from moserlp.geometry import ExactPoint, PointSet
from moserlp.lp import LpSolution
from moserlp.moser_lp import FourierGrid, build, solve_instance
from moserlp.udgraph import build_udg, independent_sets, mask_members

COARSE = FourierGrid(0.1, 120)


@pytest.fixture(scope="module")
def spindle():
    return load_points("moser-spindle").point_set()


@pytest.fixture(scope="module")
def solved(spindle):
    inst = build(spindle)
    sol = solve_instance(inst)
    return inst, sol, extract(inst, sol)


def brute_V(X, cert):
    """V(S) for every independent S by direct summation over S's subsets."""
    out = {}
    for S in independent_sets(build_udg(X)):
        members = set(mask_members(S))
        v = Fraction(cert.wT)
        v -= sum(Fraction(w) for j, w in cert.w1.items() if j in members)
        v -= sum(Fraction(w) for (j, k), w in cert.w2.items() if j in members and k in members)
        for (I, J), w in cert.wc.items():
            v += Fraction(w) * (set(I) <= members) - Fraction(w) * (set(J) <= members)
        out[S] = v
    return out


def test_spindle_round_trip(spindle, solved):
    inst, sol, cert = solved
    text = format_certificate(cert)
    again = parse_certificate(text)
    assert again == cert
    res = verify(spindle, again)
    assert res.passed
    assert abs(res.final_bound - sol.objective) < 1e-3
    assert res.final_bound >= cert.wT
    assert "status = PASS" in res.to_text()


def test_duality_gap(solved):
    _, sol, cert = solved
    assert cert.wT == pytest.approx(sol.objective, abs=1e-7)


def test_tampered_wT_rejected(spindle, solved):
    _, _, cert = solved
    bad = DualCertificate(cert.w0, cert.wT - 0.01, cert.w1, cert.w2, cert.wc, cert.provenance)
    with pytest.raises(VerificationFailure) as e:
        verify(spindle, bad)
    assert "nu" in e.value.reason
    res = verify(spindle, bad, raise_on_failure=False)
    assert not res.passed and res.nu >= 0.0099


def test_check_V_matches_brute(spindle, solved):
    _, _, cert = solved
    rep = check_V(spindle, cert)
    values = brute_V(spindle, cert)
    assert rep.nu_exact == max(Fraction(0), -min(values.values()))
    assert rep.atoms == len(values)


def test_trivial_certificate():
    X = PointSet([ExactPoint(0)])
    cert = DualCertificate(0.0, 1.0, {0: 1.0}, provenance={"points": X.digest()})
    res = verify(X, cert, T=10.0, h=0.01)
    assert res.passed and res.final_bound == pytest.approx(1.0) and res.nu == 0
    assert 0 <= res.mu < 1e-12  # only the floating rounding allowance


def test_table2_w1_tamper_rejected():
    X = load_points("x23").point_set()
    cert = parse_certificate(fixture_path("table2-partial-cert").read_text())
    bad = DualCertificate(cert.w0, cert.wT, {0: 0.9}, cert.w2, cert.wc, cert.provenance)
    with pytest.raises(VerificationFailure) as e:
        verify(X, bad, T=1e4, h=0.01, tail_scale_floor=0.1, tail_coef=2.0)
    assert "tail" in e.value.reason


def test_table2_without_wc_has_large_nu():
    X = load_points("x23").point_set()
    cert = parse_certificate(fixture_path("table2-partial-cert").read_text())
    assert check_V(X, cert).nu > 1.0


def test_provenance_mismatch(spindle, solved):
    _, _, cert = solved
    with pytest.raises(CertificateError):
        check_V(load_points("k3").point_set(), cert)
    with pytest.raises(CertificateError):
        check_V(spindle, DualCertificate(cert.w0, cert.wT, cert.w1, cert.w2, cert.wc))


def test_index_checks(solved):
    _, _, cert = solved
    cert.check_indices(7)
    with pytest.raises(CertificateError):
        cert.check_indices(3)
    with pytest.raises(CertificateError):
        DualCertificate(0.0, 1.0, w2={(1, 1): 0.5})
    with pytest.raises(CertificateError):
        DualCertificate(0.0, 1.0, wc={((0,), (1, 2)): 0.5})
    with pytest.raises(CertificateError):
        DualCertificate(float("nan"), 1.0)


def test_extract_rejects_failed_solution(solved):
    inst, _, _ = solved
    import numpy as np
    bad = LpSolution("infeasible", float("nan"), np.zeros(1), np.zeros(1))
    with pytest.raises(CertificateError):
        extract(inst, bad)


def test_parse_errors():
    with pytest.raises(CertificateError):
        parse_certificate("[scalars]\nw0 = 1.0\n")
    with pytest.raises(CertificateError):
        parse_certificate("[bogus]\n")


def test_fit_wc_recovers_own_slack(spindle):
    inst = build(spindle, COARSE, 1, 2)
    cert = extract(inst, solve_instance(inst))
    assert cert.wc
    fitted, nu = fit_wc(inst, cert.with_wc({}))
    assert nu <= 1e-9
    assert check_V(inst, fitted).nu <= 1e-7


finite = st.floats(-5, 5, allow_nan=False)
subsets = st.lists(st.integers(0, 6), min_size=1, max_size=3, unique=True).map(lambda s: tuple(sorted(s)))


@settings(max_examples=60, deadline=None)
@given(finite, finite,
       st.dictionaries(st.integers(0, 6), finite, max_size=4),
       st.dictionaries(st.tuples(st.integers(0, 6), st.integers(0, 6)).filter(lambda p: p[0] < p[1]), finite,
                       max_size=6),
       st.lists(st.tuples(subsets, finite), max_size=4))
def test_format_round_trip(w0, wT, w1, w2, wc_list):
    wc = {}
    for I, v in wc_list:
        J = tuple(sorted((i + 1) % 7 for i in I))
        wc[(I, J)] = v
    cert = DualCertificate(w0, wT, w1, w2, wc, {"points": "abc", "n": "7"})
    assert parse_certificate(format_certificate(cert)) == cert


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(st.integers(0, 6), finite, max_size=7),
       st.dictionaries(st.sampled_from(list(itertools.combinations(range(7), 2))), finite, max_size=8),
       finite)
def test_check_V_property(w1, w2, wT):
    X = load_points("moser-spindle").point_set()
    cert = DualCertificate(0.0, wT, w1, w2, provenance={"points": X.digest(), "n": "7"})
    values = brute_V(X, cert)
    assert check_V(X, cert).nu_exact == max(Fraction(0), -min(values.values()))
