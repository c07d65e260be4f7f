from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from toricrec.canonical import (
    AtRidge,
    CanonicalType,
    EndType,
    HatClass,
    InvalidType,
    NonpositiveLength,
    OutOfRange,
    canonical_from_json,
    canonical_to_json,
    g,
    g_pieces,
    k_of,
    recurrent_heights,
    rotation_number,
)
from toricrec.exactnum import qn


def direct_g(k, M, w, alphas, h):
    return 2 * w + k * (M - h) + sum(min(h - a, 0) for a in alphas)


@st.composite
def canonical_types(draw, rational=False):
    hat = draw(st.sampled_from(list(HatClass)))
    M = draw(st.fractions(min_value=Fraction(1, 2), max_value=3, max_denominator=6))
    w = draw(st.fractions(min_value=0, max_value=3, max_denominator=6))
    if not rational and draw(st.booleans()):
        w = w + qn("sqrt(2)")
    eps = M / 20
    n = draw(st.integers(0, 3))
    alphas = [M * Fraction(draw(st.integers(2, 32)), 40) for _ in range(n)]
    return CanonicalType(hat, M, w, alphas, eps)


def test_k_table():
    assert [k_of(c) for c in "BCDE"] == [8, 8, 7, 6]
    assert HatClass.D.k == 7


def test_g_example():
    T = CanonicalType("C", 1, 1, ["3/4", "1/2"])
    assert g(T, Fraction(1, 4)) == 2 + 6 - Fraction(1, 2) - Fraction(1, 4)
    assert g(T, Fraction(1, 4)) == Fraction(29, 4)
    assert g(T, 0) == Fraction(35, 4)


@given(canonical_types())
def test_g_matches_direct_formula(T):
    for j in range(11):
        h = T.M * Fraction(j, 10)
        assert g(T, h) == direct_g(T.k, T.M, T.w, T.alphas, h)


@given(canonical_types())
def test_g_pieces_reproduce_g(T):
    pieces = g_pieces(T)
    assert pieces[0].lo == 0 and pieces[-1].hi == T.M
    for pc in pieces:
        for t in (0, Fraction(1, 3), 1):
            h = pc.lo + (pc.hi - pc.lo) * t
            assert g(T, h) == pc.c0 + pc.c1 * (T.M - h)
    # slope on the lowest piece is -(k - n)
    assert pieces[0].c1 == T.k - T.n


def test_g_out_of_range():
    T = CanonicalType("B", 1, 1)
    with pytest.raises(OutOfRange):
        g(T, 2)


def test_rotation_numbers():
    assert rotation_number(CanonicalType("B", 1, 1), Fraction(1, 2)) == Fraction(1, 6)
    rho = rotation_number(CanonicalType("B", 1, qn("sqrt(2)")), Fraction(1, 2))
    assert rho == 1 / (2 * qn("sqrt(2)") + 4)
    assert rho == qn("1/2 - 1/4*sqrt(2)")
    with pytest.raises(AtRidge):
        rotation_number(CanonicalType("B", 1, 1), 1)


@given(st.fractions(min_value=0, max_value=Fraction(98, 100), max_denominator=100))
def test_monotone_rotation_constant(h):
    T = CanonicalType("B", 1, 0)
    assert rotation_number(T, h) == Fraction(1, 4)
    assert rotation_number(CanonicalType("E", 1, 0), h) == Fraction(1, 3)


@pytest.mark.parametrize(
    "kw, field",
    [
        (dict(M=0), "M"),
        (dict(w=-1), "w"),
        (dict(alphas=["3/2"]), "alphas"),
        (dict(alphas=["0"]), "alphas"),
        (dict(alphas=["995/1000"]), "alphas"),
        (dict(epsilon="2"), "epsilon"),
        (dict(w=qn("sqrt(2)"), alphas=[qn("sqrt(3)") / 4]), "alphas"),
    ],
)
def test_validation(kw, field):
    base = dict(hat="B", M=1, w=1)
    base.update(kw)
    with pytest.raises(InvalidType) as info:
        CanonicalType(**base)
    assert info.value.field == field


def test_nonpositive_length():
    # g(0) = 6 - 9 * 9/10 < 0
    with pytest.raises(NonpositiveLength):
        CanonicalType("E", 1, 0, ["9/10"] * 9, epsilon="1/20")
    CanonicalType("E", 1, 0, ["9/10"] * 6, epsilon="1/20")


def test_alphas_sorted_descending():
    T = CanonicalType("B", 1, 1, ["1/4", "3/4", "1/2"])
    assert T.alphas == (qn("3/4"), qn("1/2"), qn("1/4"))
    assert T.n == 3


def test_excluded_set():
    T = CanonicalType("B", 1, 1, ["1/2"], epsilon="1/10")
    U = T.excluded
    assert Fraction(1, 2) in U and Fraction(95, 100) in U and 1 in U
    assert Fraction(2, 5) not in U and Fraction(9, 10) not in U
    assert U.admissible() == [(0, Fraction(2, 5)), (Fraction(3, 5), Fraction(9, 10))]


def test_recurrent_heights_examples():
    rh = recurrent_heights(CanonicalType("B", 1, 1), 12)
    assert (qn("1/2"), Fraction(1, 6)) in rh.points
    assert not rh.whole_interval
    rh = recurrent_heights(CanonicalType("B", 1, 0), 12)
    assert rh.intervals == ((0, 1, Fraction(1, 4)),)
    rh = recurrent_heights(CanonicalType("B", 1, qn("sqrt(2)")), 12)
    for h, r in rh.points:
        assert not h.is_rational()
        assert rotation_number(CanonicalType("B", 1, qn("sqrt(2)")), h) == r


@pytest.mark.parametrize(
    "T",
    [
        CanonicalType("B", 1, 1),
        CanonicalType("C", 1, Fraction(1, 3), ["1/2"]),
        CanonicalType("D", Fraction(3, 2), Fraction(2, 5), ["1", "1/3"], epsilon="1/10"),
    ],
)
def test_recurrent_heights_complete_on_grid(T):
    # brute force: every grid height with small-denominator rho must be listed
    q_max = 16
    listed = dict(recurrent_heights(T, q_max).points)
    for j in range(240):
        h = T.M * Fraction(j, 240)
        rho = rotation_number(T, h).to_fraction()
        if rho.denominator <= q_max:
            assert listed.get(h) == rho, h
    for h, r in listed.items():
        assert rotation_number(T, h) == r and r.denominator <= q_max


def test_json_roundtrip():
    T = CanonicalType("D", "3/2", qn("1/2 + sqrt(2)"), ["1", "1/3"], "1/10",
                      end_types=(EndType.TWO, EndType.THREE))
    obj = canonical_to_json(T)
    assert canonical_from_json(obj) == T


@pytest.mark.parametrize(
    "obj, field",
    [
        ({"M": "1", "w": "1"}, "hat_class"),
        ({"hat_class": "Q", "M": "1", "w": "1"}, "hat_class"),
        ({"hat_class": "B", "M": "x", "w": "1"}, "M"),
        ({"hat_class": "B", "M": "1", "w": "1", "d": 3, "alphas": ["1/2*sqrt(2)"]}, "alphas"),
        ({"hat_class": "B", "M": "1", "w": "1", "end_types": ["Four", "Two"]}, "end_types"),
    ],
)
def test_json_errors(obj, field):
    with pytest.raises(InvalidType) as info:
        canonical_from_json(obj)
    assert info.value.field == field
