"""Recurrence verdicts for torus fibres, three-gap statistics and height scans."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key

from .canonical import CanonicalType, recurrent_heights, rotation_number
from .chart import NodalChart, natural_chart
from .exactnum import (
    ContinuedFraction,
    QuadraticNumber,
    continued_fraction,
    format_literal,
    min_return_distance,
)
from .tau import InExcludedSet, t_action

__all__ = [
    "NonRecurrent",
    "Periodic",
    "RecurrenceVerdict",
    "ITERATE_LIMIT",
    "classify_rotation",
    "verdict",
    "orbit_gaps",
    "distinct_gaps",
    "ScanReport",
    "scan_heights",
    "scan",
]

# periods up to this are confirmed by literally iterating the circle action
ITERATE_LIMIT = 10_000


@dataclass(frozen=True)
class NonRecurrent:
    cf: ContinuedFraction
    min_return_N: tuple[int, QuadraticNumber]
    horizon: int

    name = "NonRecurrent"

    def witness(self) -> dict:
        n, dist = self.min_return_N
        return {"cf": str(self.cf), "horizon": self.horizon, "n_star": n, "dist": format_literal(dist)}


@dataclass(frozen=True)
class Periodic:
    period: int
    # how the return was established: "iterated" or "arithmetic"
    method: str = "iterated"

    name = "Periodic"

    def witness(self) -> dict:
        return {"period": self.period, "method": self.method}


@dataclass(frozen=True)
class RecurrenceVerdict:
    h: QuadraticNumber
    rho: QuadraticNumber
    outcome: NonRecurrent | Periodic

    @property
    def recurrent(self) -> bool:
        return isinstance(self.outcome, Periodic)

    def __str__(self):
        if isinstance(self.outcome, Periodic):
            return f"Periodic({self.outcome.period})"
        return "NonRecurrent"

    def to_json(self) -> dict:
        return {
            "h": format_literal(self.h),
            "rho": format_literal(self.rho),
            "outcome": str(self),
            "witness": self.outcome.witness(),
        }


def _first_return(step, x0, limit: int) -> int | None:
    x = x0
    for n in range(1, limit + 1):
        x = step(x)
        if x == x0:
            return n
    return None


def _periodic(rho: QuadraticNumber, step, x0) -> Periodic:
    q = rho.to_fraction().denominator
    if q <= ITERATE_LIMIT:
        n = _first_return(step, x0, q)
        if n != q:
            raise AssertionError(f"exact iteration returned at {n}, expected {q}")
        return Periodic(q, "iterated")
    # q * rho is an integer and p/q is reduced, so q is the least return time
    return Periodic(q, "arithmetic")


def classify_rotation(rho, N: int) -> NonRecurrent | Periodic:
    """Outcome for the unit-circle rotation x -> x + rho (mod 1)."""
    rho = QuadraticNumber.coerce(rho).frac()
    if N < 1:
        raise ValueError("N must be >= 1")
    if rho.is_rational():
        return _periodic(rho, lambda x: (x + rho).frac(), QuadraticNumber(0))
    return NonRecurrent(continued_fraction(rho), min_return_distance(rho, N), N)


def verdict(T: CanonicalType, h, N: int, chart: NodalChart | None = None) -> RecurrenceVerdict:
    """Certified recurrence outcome for the fibre torus at height h.

    An irrational rotation number settles non-recurrence for every n >= 1;
    the closest return over n <= N is attached as a quantitative witness.
    """
    h = QuadraticNumber.coerce(h)
    if N < 1:
        raise ValueError("N must be >= 1")
    if T.excluded.contains(h):
        raise InExcludedSet(f"h = {h} lies in the excluded set U")
    C = chart or natural_chart(T)
    rho = rotation_number(T, h)
    if rho.is_rational():
        t = 2 * (T.M - h)
        x0 = t_action(C, (0, h), 0)
        outcome = _periodic(rho, lambda x: t_action(C, x, t), x0)
    else:
        outcome = NonRecurrent(continued_fraction(rho), min_return_distance(rho, N), N)
    return RecurrenceVerdict(h, rho, outcome)


# -----------------------------------------------------------------------------
# three-gap diagnostics


def _cmp(x, y) -> int:
    return (x > y) - (x < y)


def _surd_sign(a: int, b: int, d: int) -> int:
    """Sign of a + b*sqrt(d) for integers a, b."""
    sa, sb = (a > 0) - (a < 0), (b > 0) - (b < 0)
    if sb == 0 or sa == sb:
        return sa or sb
    if sa == 0:
        return sb
    return sa if a * a > b * b * d else sb


def _rational_gaps(r: Fraction, n: int) -> list[QuadraticNumber]:
    pts = sorted({(i * r) % 1 for i in range(n)})
    gaps = [b - a for a, b in zip(pts, pts[1:])] + [1 - pts[-1] + pts[0]]
    return [QuadraticNumber(x) for x in sorted(gaps)]


def orbit_gaps(rho, n: int) -> list[QuadraticNumber]:
    """Sorted circular gaps between the distinct points i*rho mod 1, 0 <= i < n."""
    rho = QuadraticNumber.coerce(rho)
    if not (0 < rho < 1):
        raise ValueError("rho must lie in (0, 1)")
    if n < 1:
        raise ValueError("n must be >= 1")
    if rho.is_rational():
        return _rational_gaps(rho.to_fraction(), n)
    # all points are (a_i + b_i sqrt d) / C with integers a_i = i A - k_i C, b_i = i B;
    # irrational rho means they are pairwise distinct
    A, B, C = rho.integer_form()
    d = rho.d
    bits = 2 * n.bit_length() + 64
    R = math.isqrt(B * B * d << (2 * bits))  # |B| sqrt(d) * 2^bits, rounded down
    R = R if B > 0 else -R - 1
    pts = []
    for i in range(n):
        s = math.isqrt(i * i * B * B * d)
        s = s if B > 0 or i == 0 else -s - 1
        k = (i * A + s) // C  # floor(i rho), exact
        a, b = i * A - k * C, i * B
        # approximation of (a + b sqrt d) * 2^bits with error below n + 1
        pts.append(((a << bits) + i * R, a, b))
    pts.sort()
    slack = n + 2
    # the integer key is exact up to slack; settle near-ties exactly
    for j in range(1, len(pts)):
        if pts[j][0] - pts[j - 1][0] <= 2 * slack:
            k = j
            while k > 0 and pts[k][0] - pts[k - 1][0] <= 2 * slack and \
                    _surd_sign(pts[k][1] - pts[k - 1][1], pts[k][2] - pts[k - 1][2], d) < 0:
                pts[k], pts[k - 1] = pts[k - 1], pts[k]
                k -= 1
    raw = [(pts[j + 1][1] - pts[j][1], pts[j + 1][2] - pts[j][2]) for j in range(len(pts) - 1)]
    raw.append((C - pts[-1][1] + pts[0][1], pts[0][2] - pts[-1][2]))
    counts: dict[tuple[int, int], int] = {}
    for gap in raw:
        counts[gap] = counts.get(gap, 0) + 1
    values = sorted(counts, key=cmp_to_key(lambda x, y: _surd_sign(x[0] - y[0], x[1] - y[1], d)))
    out = []
    for a, b in values:
        q = QuadraticNumber(Fraction(a, C), Fraction(b, C), d)
        out.extend([q] * counts[(a, b)])
    return out


def distinct_gaps(gaps) -> list[QuadraticNumber]:
    return sorted(set(gaps), key=cmp_to_key(_cmp))


# -----------------------------------------------------------------------------
# scans


def _farey(q_max: int, lo, hi) -> list[Fraction]:
    out = set()
    for q in range(1, q_max + 1):
        for p in range(math.ceil(q * lo), math.floor(q * hi) + 1):
            out.add(Fraction(p, q))
    return sorted(out)


def scan_heights(T: CanonicalType, resolution: int) -> list[Fraction]:
    """Evenly spaced heights in [0, M), each nudged to the closest admissible
    rational with denominator <= 2*resolution away from every alpha_i."""
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    if not T.excluded.admissible():
        return []
    q_max = 2 * resolution
    candidates = [c for c in _farey(q_max, 0, math.ceil(T.M))
                  if c < T.M and not T.excluded.contains(c) and c not in T.alphas]
    cand_set = set(candidates)
    picked: list[Fraction] = []
    used = set()
    for j in range(resolution):
        target = (2 * j + 1) * T.M / (2 * resolution)
        if target.is_rational():
            t = target.to_fraction()
            if t.denominator <= q_max and t not in used and t in cand_set:
                used.add(t)
                picked.append(t)
                continue
        best = None
        for c in candidates:
            if c in used:
                continue
            d = abs(c - target)
            if best is None or d < best[0]:
                best = (d, c)
        if best is not None:
            used.add(best[1])
            picked.append(best[1])
    return sorted(picked)


@dataclass
class ScanReport:
    entries: list[RecurrenceVerdict] = field(default_factory=list)
    recurrent: object = None  # canonical.RecurrentHeights
    q_max: int = 0
    irrational_data: bool = False

    @property
    def non_recurrent_count(self) -> int:
        return sum(1 for e in self.entries if not e.recurrent)

    @property
    def periodic_count(self) -> int:
        return sum(1 for e in self.entries if e.recurrent)

    def to_json(self) -> dict:
        rh = self.recurrent
        heights = [] if rh is None else [
            {"h": format_literal(h), "rho": str(r)} for h, r in rh.points
        ]
        intervals = [] if rh is None else [
            {"lo": format_literal(lo), "hi": format_literal(hi), "rho": str(r)} for lo, hi, r in rh.intervals
        ]
        summary = {
            "non_recurrent_count": self.non_recurrent_count,
            "periodic_count": self.periodic_count,
            "recurrent_heights": heights,
            "recurrent_intervals": intervals,
            "q_max": self.q_max,
        }
        if self.irrational_data:
            summary["note"] = ("irrational data: finitely many recurrent heights per denominator, "
                               "a countable set of measure zero")
        return {"entries": [e.to_json() for e in self.entries], "summary": summary}


def scan(T: CanonicalType, resolution: int, N: int, q_max: int | None = None) -> ScanReport:
    """Verdicts along a grid of heights plus the exact recurrent heights.

    q_max bounds the denominators in the recurrent-height list; it defaults to
    min(N, 100) since the enumeration is quadratic in q_max.
    """
    if q_max is None:
        q_max = min(N, 100)
    C = natural_chart(T)
    entries = [verdict(T, h, N, C) for h in scan_heights(T, resolution)]
    irrational = not T.w.is_rational() or any(not a.is_rational() for a in T.alphas) or not T.M.is_rational()
    return ScanReport(entries, recurrent_heights(T, q_max), q_max, irrational)
