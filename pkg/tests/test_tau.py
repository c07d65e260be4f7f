import dataclasses
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tests.test_canonical import canonical_types
from toricrec.canonical import CanonicalType, g
from toricrec.chart import natural_chart
from toricrec.exactnum import PlanePoint, qn
from toricrec.polygon import polygon_area
from toricrec.tau import (
    DomainMismatch,
    InExcludedSet,
    IntMatrix,
    PiecewiseUnimodularMap,
    build_tau,
    chart_domain,
    compose,
    halton,
    identity_map,
    inverse,
    power,
    reglue_map,
    sample_points,
    shear_map,
    t_action,
    verify_iso,
)

INSTANCES = [
    CanonicalType("B", 1, qn("sqrt(2)")),
    CanonicalType("B", 1, 1),
    CanonicalType("C", 2, 1, ["1", "1/2"]),
    CanonicalType("D", 1, qn("sqrt(3)"), ["3/4"]),
    CanonicalType("E", "3/2", qn("1/2 + sqrt(2)"), ["1", "1/3"], "1/10"),
    CanonicalType("B", 1, 0),
]


def translate(T, x, t):
    """Independent reference for moving t clockwise along the level circle."""
    u, h = x
    L = g(T, h)
    u = u - t
    while u < 0:
        u = u + L
    while u >= L:
        u = u - L
    return u


@pytest.mark.parametrize("T", INSTANCES, ids=lambda T: f"{T.hat.value}-n{T.n}")
def test_tau_verifies(T):
    C = natural_chart(T)
    rep = verify_iso(build_tau(T), C, 300)
    assert rep.passed, rep.to_json()
    assert rep.points_checked >= 300


@pytest.mark.parametrize("T", INSTANCES[:4], ids=lambda T: f"{T.hat.value}-n{T.n}")
def test_tau_against_reference(T):
    tau = build_tau(T)
    C = natural_chart(T)
    for x in sample_points(T, 150):
        y = tau(x)
        assert y[1] == x[1]
        assert C.normalize(y[0], y[1]) == translate(T, x, 2 * (T.M - x[1]))


@settings(max_examples=15)
@given(canonical_types())
def test_tau_verifies_random_types(T):
    assert verify_iso(build_tau(T), natural_chart(T), 60).passed


def test_linear_parts_are_integer_shears():
    T = INSTANCES[2]
    for p in build_tau(T).pieces:
        L = p.linear
        assert (L.a, L.c, L.d) == (1, 0, 1) and L.det == 1


def test_non_unimodular_piece_fails_check_a():
    T = INSTANCES[0]
    tau = build_tau(T)
    bad = PiecewiseUnimodularMap(
        tuple(dataclasses.replace(p, linear=IntMatrix(2, 0, 0, 1)) for p in tau.pieces), tau.domain, tau.codomain)
    rep = verify_iso(bad, natural_chart(T), 50)
    assert not rep["unimodular"].passed
    assert not rep.passed


def test_identity_fails_circle_action():
    T = INSTANCES[0]
    rep = verify_iso(identity_map(T), natural_chart(T), 50)
    assert rep["unimodular"].passed and rep["tiling"].passed
    assert not rep["circle_action"].passed
    assert rep["circle_action"].counterexample is not None


def test_missing_piece_fails_tiling():
    T = INSTANCES[1]
    tau = build_tau(T)
    partial = PiecewiseUnimodularMap(tau.pieces[1:], tau.domain, tau.codomain)
    assert not verify_iso(partial, natural_chart(T), 50)["tiling"].passed


def test_wrong_shift_fails():
    T = INSTANCES[1]
    tau = build_tau(T)
    p0 = tau.pieces[0]
    moved = dataclasses.replace(p0, shift=(p0.shift[0] + Fraction(1, 3), p0.shift[1]))
    m = PiecewiseUnimodularMap((moved,) + tau.pieces[1:], tau.domain, tau.codomain)
    rep = verify_iso(m, natural_chart(T), 50)
    assert not rep.passed


def test_tau_squared_translates_twice():
    T = INSTANCES[3]
    tau2 = compose(build_tau(T), build_tau(T))
    for x in sample_points(T, 100):
        y = tau2(x)
        assert natural_chart(T).normalize(y[0], y[1]) == translate(T, x, 4 * (T.M - x[1]))


def test_tau_power_period():
    # rho = 1/6 at h = 1/2, so tau^6 fixes that level pointwise
    T = CanonicalType("B", 1, 1)
    C = natural_chart(T)
    tau6 = power(build_tau(T), 6)
    for j in range(7):
        x = PlanePoint(qn(6) * Fraction(j, 7), qn("1/2"))
        y = tau6(x)
        assert C.normalize(y[0], y[1]) == x[0]


def test_inverse_roundtrip():
    T = INSTANCES[4]
    tau = build_tau(T)
    ident = compose(inverse(tau), tau)
    for x in sample_points(T, 100):
        assert ident(x) == x
    assert polygon_area(chart_domain(T)[0]) > 0


def test_compose_domain_mismatch():
    a = build_tau(INSTANCES[0])
    b = build_tau(INSTANCES[1])
    with pytest.raises(DomainMismatch):
        compose(a, b)


def test_shear_then_reglue_is_tau():
    for T in INSTANCES:
        C = natural_chart(T)
        sr = compose(reglue_map(T), shear_map(T))
        shear = shear_map(T)
        assert shear.pieces[0].linear == IntMatrix(1, 2, 0, 1)
        # the regluing uses powers of the seam gluing [[1, -c1], [0, 1]]
        assert all(p.linear.a == 1 and p.linear.c == 0 for p in reglue_map(T).pieces)
        assert verify_iso(sr, C, 100).passed


def test_t_action():
    T = CanonicalType("B", 1, 1)
    C = natural_chart(T)
    assert t_action(C, (0, Fraction(1, 2)), 1) == PlanePoint(qn(5), qn("1/2"))
    assert t_action(C, (5, Fraction(1, 2)), -1) == PlanePoint(qn(0), qn("1/2"))
    with pytest.raises(InExcludedSet):
        t_action(C, (0, Fraction(995, 1000)), 1)


def test_halton():
    assert [halton(i, 2) for i in range(1, 5)] == [Fraction(1, 2), Fraction(1, 4), Fraction(3, 4), Fraction(1, 8)]
    assert halton(4, 3) == Fraction(4, 9)


def test_report_json():
    T = INSTANCES[0]
    data = verify_iso(build_tau(T), natural_chart(T), 20).to_json()
    assert data["passed"] is True
    assert [c["check"] for c in data["checks"]] == [
        "unimodular", "tiling", "edge_compatibility", "height_preserved", "circle_action"]
