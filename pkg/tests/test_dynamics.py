from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tests.strategies import unit_irrationals
from tests.test_exactnum import as_decimal, brute_min_return
from toricrec.canonical import CanonicalType, recurrent_heights
from toricrec.dynamics import (
    NonRecurrent,
    Periodic,
    classify_rotation,
    distinct_gaps,
    orbit_gaps,
    scan,
    scan_heights,
    verdict,
)
from toricrec.exactnum import QuadraticNumber, qn
from toricrec.tau import InExcludedSet

S2XS2 = CanonicalType("B", 1, qn("sqrt(2)"))


def test_verdict_s2xs2_half():
    v = verdict(S2XS2, qn("1/2"), 1000)
    assert isinstance(v.outcome, NonRecurrent)
    assert v.rho == 1 / (2 * qn("sqrt(2)") + 4)
    assert v.outcome.cf.period == (1, 4)
    n, dist = v.outcome.min_return_N
    assert dist > 0
    assert (n, dist) == brute_min_return(v.rho, 1000)


def test_verdict_periodic_six():
    v = verdict(CanonicalType("B", 1, 1), qn("1/2"), 100)
    assert v.outcome == Periodic(6, "iterated")
    assert str(v) == "Periodic(6)"


@given(st.fractions(min_value=0, max_value=Fraction(98, 100), max_denominator=60))
def test_monotone_always_period_four(h):
    v = verdict(CanonicalType("B", 1, 0), h, 10)
    assert v.outcome.period == 4


def test_verdict_in_excluded_set():
    with pytest.raises(InExcludedSet):
        verdict(CanonicalType("B", 1, 1, ["1/2"]), Fraction(1, 2), 10)
    with pytest.raises(InExcludedSet):
        verdict(S2XS2, 1, 10)


@settings(max_examples=40)
@given(st.fractions(min_value=0, max_value=1, max_denominator=200).filter(lambda r: 0 < r < 1))
def test_flip_invariance_rational(r):
    a, b = classify_rotation(r, 50), classify_rotation(1 - r, 50)
    assert a == b == Periodic(r.denominator, "iterated")


@settings(max_examples=40)
@given(unit_irrationals())
def test_flip_invariance_irrational(rho):
    a, b = classify_rotation(rho, 500), classify_rotation(1 - rho, 500)
    assert isinstance(a, NonRecurrent) and isinstance(b, NonRecurrent)
    # ||n rho|| = ||n (1 - rho)||
    assert a.min_return_N == b.min_return_N


def test_dichotomy():
    Ts = [S2XS2, CanonicalType("B", 1, 1), CanonicalType("C", 1, qn("sqrt(5)"), ["1/2"]),
          CanonicalType("D", 2, 1, ["1"], "1/10")]
    for T in Ts:
        for h in scan_heights(T, 12):
            v = verdict(T, h, 100)
            cf_periodic = isinstance(v.outcome, NonRecurrent) and bool(v.outcome.cf.period)
            returns = isinstance(v.outcome, Periodic)
            assert cf_periodic != returns


def test_periodic_has_no_earlier_return():
    from toricrec.chart import natural_chart
    from toricrec.tau import t_action

    T = CanonicalType("C", 1, 1, ["1/2"])
    C = natural_chart(T)
    for h in (Fraction(1, 4), Fraction(1, 3), Fraction(7, 10)):
        v = verdict(T, h, 10)
        q = v.outcome.period
        x0 = t_action(C, (0, h), 0)
        x = x0
        for n in range(1, q + 1):
            x = t_action(C, x, 2 * (T.M - h))
            assert (x == x0) == (n == q)


# -- gaps ----------------------------------------------------------------------


def decimal_gaps(rho, n):
    pts = sorted({as_decimal((i * rho).frac()) for i in range(n)})
    gaps = [b - a for a, b in zip(pts, pts[1:])] + [1 - pts[-1] + pts[0]]
    return sorted(gaps)


def test_gaps_quarter():
    assert orbit_gaps(qn("1/4"), 4) == [qn("1/4")] * 4
    # repeated points are merged
    assert orbit_gaps(qn("1/4"), 9) == [qn("1/4")] * 4
    assert orbit_gaps(qn("1/6"), 6) == [qn("1/6")] * 6


def test_gaps_sqrt2_small():
    gaps = orbit_gaps(qn("sqrt(2) - 1"), 5)
    assert len(gaps) == 5 and len(distinct_gaps(gaps)) <= 3
    assert sum(gaps, QuadraticNumber(0)) == 1
    assert [as_decimal(x) for x in gaps] == pytest.approx(decimal_gaps(qn("sqrt(2) - 1"), 5))


@settings(max_examples=25)
@given(unit_irrationals(d=3), st.integers(1, 150))
def test_gaps_match_decimal_oracle(rho, n):
    gaps = orbit_gaps(rho, n)
    ref = decimal_gaps(rho, n)
    assert len(gaps) == len(ref) == n
    assert all(abs(as_decimal(x) - y) < Decimal(10) ** -20 for x, y in zip(gaps, ref))
    assert len(distinct_gaps(gaps)) <= 3
    assert sum(gaps, QuadraticNumber(0)) == 1


def test_gaps_errors():
    with pytest.raises(ValueError):
        orbit_gaps(qn(0), 3)
    with pytest.raises(ValueError):
        orbit_gaps(qn("1/2"), 0)


# -- scans ---------------------------------------------------------------------


def test_scan_s2xs2():
    rep = scan(S2XS2, 50, 1000, q_max=8)
    assert rep.non_recurrent_count == 50 and rep.periodic_count == 0
    data = rep.to_json()
    assert data["summary"]["non_recurrent_count"] == 50
    assert "measure zero" in data["summary"]["note"]
    hs = [Fraction(e["h"]) for e in data["entries"]]
    assert hs == sorted(hs)
    assert all(e["outcome"] == "NonRecurrent" for e in data["entries"])


def test_scan_rational_width_matches_recurrent_heights():
    T = CanonicalType("B", 1, 1)
    rep = scan(T, 10, 100, q_max=8)
    q_max = max(e.outcome.period for e in rep.entries)
    listed = dict(recurrent_heights(T, q_max).points)
    assert rep.periodic_count == 10
    for e in rep.entries:
        assert listed[e.h] == e.rho
        assert e.outcome.period == e.rho.to_fraction().denominator


def test_scan_mixed_with_irrational_parked_heights():
    # w rational but an irrational alpha: heights below alpha get irrational rho
    T = CanonicalType("B", 1, 1, [qn("sqrt(2)") / 4])
    rep = scan(T, 20, 100)
    assert rep.periodic_count > 0 and rep.non_recurrent_count > 0


def test_scan_heights_avoid_excluded_set():
    T = CanonicalType("C", 1, 1, ["1/2"], "1/10")
    hs = scan_heights(T, 30)
    assert len(hs) == 30 == len(set(hs))
    for h in hs:
        assert h not in T.excluded and h.denominator <= 60


def test_empty_scan():
    # U covers all of [0, M]: (-1/10, 7/10) around alpha and (3/5, 1] around M
    T = CanonicalType("B", 1, 1, ["3/10"], "2/5")
    assert T.excluded.admissible() == []
    rep = scan(T, 10, 100)
    assert rep.entries == [] and rep.to_json()["summary"]["periodic_count"] == 0
