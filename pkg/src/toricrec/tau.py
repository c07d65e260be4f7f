"""Piecewise unimodular-affine maps on chart domains and the map tau.

In chart coordinates (u, h), tau moves each point clockwise along its level
circle by 2(M - h).  On a height interval where g(h) = c0 + c1 (M - h) it is
realised by pieces

    (u, h) -> (u + (2 - m c1) h - 2M + m (c0 + c1 M), h),

i.e. the global shear [[1, 2], [0, 1]] followed, on the overflow region, by
m applications of the seam gluing u -> u + g(h).  Every linear part is an
integer shear, so every piece is genuinely affine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

from .canonical import CanonicalType, canonical_to_json, g_pieces
from .chart import NodalChart, natural_chart
from .exactnum import PlanePoint, QuadraticNumber, UnimodularMatrix, format_literal
from .polygon import clip_halfplane, convex_intersection, point_in_convex, polygon_area, simplify_polygon

__all__ = [
    "TauError",
    "DomainMismatch",
    "InExcludedSet",
    "IntMatrix",
    "AffinePiece",
    "PiecewiseUnimodularMap",
    "CheckResult",
    "VerificationReport",
    "CircleAction",
    "t_action",
    "chart_domain",
    "identity_map",
    "shear_map",
    "reglue_map",
    "build_tau",
    "inverse",
    "compose",
    "power",
    "verify_iso",
    "halton",
    "sample_points",
]

SHEAR = UnimodularMatrix(1, 2, 0, 1)


class TauError(ValueError):
    pass


class DomainMismatch(TauError):
    pass


class InExcludedSet(TauError):
    pass


class IntMatrix(NamedTuple):
    """Integer 2x2 matrix; may fail to be unimodular (that is what check (a) catches)."""

    a: int
    b: int
    c: int
    d: int

    @classmethod
    def of(cls, m) -> "IntMatrix":
        if isinstance(m, UnimodularMatrix):
            return cls(m.a, m.b, m.c, m.d)
        if len(m) == 2:
            (a, b), (c, d) = m
            return cls(a, b, c, d)
        return cls(*m)

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def apply(self, p):
        return (self.a * p[0] + self.b * p[1], self.c * p[0] + self.d * p[1])

    def __matmul__(self, o: "IntMatrix") -> "IntMatrix":
        return IntMatrix(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                         self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    def solve(self, p):
        """L^{-1} p over the rationals."""
        D = self.det
        if D == 0:
            raise TauError("singular linear part")
        x, y = p
        return ((self.d * x - self.b * y) / D, (-self.c * x + self.a * y) / D)


IDENTITY = IntMatrix(1, 0, 0, 1)


@dataclass(frozen=True)
class AffinePiece:
    region: tuple[PlanePoint, ...]  # convex, counter-clockwise
    linear: IntMatrix
    shift: tuple[QuadraticNumber, QuadraticNumber]

    def __call__(self, x) -> PlanePoint:
        lx, ly = self.linear.apply(x)
        return PlanePoint(lx + self.shift[0], ly + self.shift[1])

    def preimage(self, y) -> PlanePoint:
        return PlanePoint(*self.linear.solve((y[0] - self.shift[0], y[1] - self.shift[1])))

    def image_region(self) -> tuple[PlanePoint, ...]:
        pts = [self(p) for p in self.region]
        if self.linear.det < 0:
            pts.reverse()
        return tuple(pts)

    def contains(self, x) -> bool:
        return point_in_convex(self.region, x)


@dataclass(frozen=True)
class PiecewiseUnimodularMap:
    pieces: tuple[AffinePiece, ...]
    domain: object = "plane"
    codomain: object = "plane"

    def locate(self, x) -> list[int]:
        return [i for i, p in enumerate(self.pieces) if p.contains(x)]

    def __call__(self, x) -> PlanePoint:
        for p in self.pieces:
            if p.contains(x):
                return p(x)
        raise TauError(f"({x[0]}, {x[1]}) is outside every piece")

    @classmethod
    def affine(cls, matrix, region: Sequence, shift=(0, 0)) -> "PiecewiseUnimodularMap":
        piece = AffinePiece(
            tuple(PlanePoint.of(*p) for p in region),
            IntMatrix.of(matrix),
            (QuadraticNumber.coerce(shift[0]), QuadraticNumber.coerce(shift[1])),
        )
        return cls((piece,), _region_key([piece.region]), _region_key([piece.image_region()]))


def _region_key(regions) -> tuple:
    return ("regions",) + tuple(sorted(
        tuple(sorted((str(p[0]), str(p[1])) for p in r)) for r in regions
    ))


def _chart_key(T: CanonicalType) -> tuple:
    return ("chart",) + tuple(sorted((k, str(v)) for k, v in canonical_to_json(T).items()))


# -----------------------------------------------------------------------------
# the circle action


@dataclass(frozen=True)
class CircleAction:
    h: QuadraticNumber
    circumference: QuadraticNumber
    offset: QuadraticNumber

    def __post_init__(self):
        if not (0 <= self.offset < self.circumference):
            raise TauError("offset must lie in [0, circumference)")


def t_action(C: NodalChart, x, t) -> PlanePoint:
    """Translate x by integral affine distance t clockwise along its level set."""
    u, h = QuadraticNumber.coerce(x[0]), QuadraticNumber.coerce(x[1])
    T = C.type
    if not (0 <= h < T.M):
        raise TauError(f"h = {h} must lie in [0, M)")
    if T.excluded.contains(h):
        raise InExcludedSet(f"h = {h} lies in the excluded set U")
    return PlanePoint(C.normalize(u - t, h), h)


# -----------------------------------------------------------------------------
# chart maps


def chart_domain(T: CanonicalType) -> list[tuple[PlanePoint, ...]]:
    """Trapezoids {a <= h <= b, 0 <= u <= g(h)} over the admissible intervals."""
    out = []
    pieces = g_pieces(T)
    for a, b in T.excluded.admissible():
        pc = _piece_for(pieces, a, b)
        ga, gb = pc.c0 + pc.c1 * (T.M - a), pc.c0 + pc.c1 * (T.M - b)
        z = QuadraticNumber(0)
        out.append(tuple(simplify_polygon([PlanePoint(z, a), PlanePoint(ga, a), PlanePoint(gb, b), PlanePoint(z, b)])))
    return out


def _piece_for(pieces, a, b):
    for pc in pieces:
        if pc.lo <= a and b <= pc.hi:
            return pc
    raise TauError(f"[{a}, {b}] straddles a breakpoint of g")


def identity_map(T: CanonicalType) -> PiecewiseUnimodularMap:
    z = QuadraticNumber(0)
    key = _chart_key(T)
    return PiecewiseUnimodularMap(tuple(AffinePiece(r, IDENTITY, (z, z)) for r in chart_domain(T)), key, key)


def _sheared_pieces(T: CanonicalType, m_values=None):
    """Yield (region, linear, shift, m, GPiece) for the pieces of tau."""
    M = T.M
    gp = g_pieces(T)
    for (a, b), trap in zip(T.excluded.admissible(), chart_domain(T)):
        pc = _piece_for(gp, a, b)
        G = pc.c0 + pc.c1 * M  # g(h) = G - c1 h
        rho = [2 * (M - h) / (pc.c0 + pc.c1 * (M - h)) for h in (a, b)]
        lo, hi = math.floor(min(rho)) - 1, math.ceil(max(rho)) + 1
        for m in range(lo, hi + 1):
            if m_values is not None and m not in m_values:
                continue
            # 0 <= u - 2M + 2h + m (G - c1 h) <= G - c1 h
            region = clip_halfplane(trap, 1, 2 - m * pc.c1, 2 * M - m * G)
            region = clip_halfplane(region, -1, -(2 - (m - 1) * pc.c1), -2 * M + (m - 1) * G)
            if len(region) < 3 or not polygon_area(region) > 0:
                continue
            yield tuple(region), IntMatrix(1, 2 - m * pc.c1, 0, 1), (-2 * M + m * G, QuadraticNumber(0)), m, pc


def build_tau(T: CanonicalType) -> PiecewiseUnimodularMap:
    natural_chart(T)  # validates node layout
    key = _chart_key(T)
    pieces = tuple(AffinePiece(r, L, s) for r, L, s, _, _ in _sheared_pieces(T))
    return PiecewiseUnimodularMap(pieces, key, key)


def shear_map(T: CanonicalType) -> PiecewiseUnimodularMap:
    """The global shear [[1, 2], [0, 1]] (moving u by -2(M - h)) on the chart domain."""
    key = _chart_key(T)
    pieces = tuple(AffinePiece(r, IntMatrix.of(SHEAR), (-2 * T.M, QuadraticNumber(0))) for r in chart_domain(T))
    return PiecewiseUnimodularMap(pieces, key, _region_key([p.image_region() for p in pieces]))


def reglue_map(T: CanonicalType) -> PiecewiseUnimodularMap:
    """Cut the sheared diagram along the seam and reglue the overhanging parts.

    The region of the sheared diagram lying m seam-widths to the left of the
    fundamental domain is moved back by m applications of u -> u + g(h).
    """
    sheared = shear_map(T)
    pieces = []
    gp = g_pieces(T)
    for (a, b), sp in zip(T.excluded.admissible(), sheared.pieces):
        pc = _piece_for(gp, a, b)
        G = pc.c0 + pc.c1 * T.M
        img = list(sp.image_region())
        rho = [2 * (T.M - h) / (pc.c0 + pc.c1 * (T.M - h)) for h in (a, b)]
        for m in range(0, math.ceil(max(rho)) + 2):
            # the band -m g <= u <= -(m-1) g of the sheared diagram
            region = clip_halfplane(img, 1, -m * pc.c1, -m * G)
            region = clip_halfplane(region, -1, (m - 1) * pc.c1, (m - 1) * G)
            if len(region) < 3 or not polygon_area(region) > 0:
                continue
            pieces.append(AffinePiece(tuple(region), IntMatrix(1, -m * pc.c1, 0, 1), (m * G, QuadraticNumber(0))))
    return PiecewiseUnimodularMap(tuple(pieces), sheared.codomain, _chart_key(T))


def inverse(m: PiecewiseUnimodularMap) -> PiecewiseUnimodularMap:
    out = []
    for p in m.pieces:
        L = p.linear
        if L.det not in (1, -1):
            raise TauError("only unimodular pieces can be inverted")
        Li = IntMatrix(L.det * L.d, -L.det * L.b, -L.det * L.c, L.det * L.a)
        sx, sy = Li.apply(p.shift)
        out.append(AffinePiece(p.image_region(), Li, (-sx, -sy)))
    return PiecewiseUnimodularMap(tuple(out), m.codomain, m.domain)


def compose(m1: PiecewiseUnimodularMap, m2: PiecewiseUnimodularMap) -> PiecewiseUnimodularMap:
    """m1 after m2, on the common refinement of the pieces."""
    if m2.codomain != m1.domain:
        raise DomainMismatch("codomain of the inner map differs from the domain of the outer map")
    out = []
    for p2 in m2.pieces:
        for p1 in m1.pieces:
            pre = [p2.preimage(y) for y in p1.region]
            if p2.linear.det < 0:
                pre.reverse()
            region = convex_intersection(p2.region, pre)
            if len(region) < 3 or not polygon_area(region) > 0:
                continue
            L = p1.linear @ p2.linear
            sx, sy = p1.linear.apply(p2.shift)
            out.append(AffinePiece(tuple(region), L, (sx + p1.shift[0], sy + p1.shift[1])))
    return PiecewiseUnimodularMap(tuple(out), m2.domain, m1.codomain)


def power(m: PiecewiseUnimodularMap, n: int) -> PiecewiseUnimodularMap:
    if n < 1:
        raise ValueError("n must be >= 1")
    out = m
    for _ in range(n - 1):
        out = compose(m, out)
    return out


# -----------------------------------------------------------------------------
# verification


def halton(i: int, base: int) -> Fraction:
    f, r = Fraction(1), Fraction(0)
    while i > 0:
        f /= base
        r += f * (i % base)
        i //= base
    return r


def sample_points(T: CanonicalType, count: int, start: int = 1) -> list[PlanePoint]:
    """Deterministic low-discrepancy points of the chart domain below U."""
    intervals = T.excluded.admissible()
    if not intervals:
        return []
    total = QuadraticNumber(0)
    for a, b in intervals:
        total = total + (b - a)
    gp = g_pieces(T)
    out = []
    for i in range(start, start + count):
        t = total * halton(i, 2)
        for a, b in intervals:
            if t <= b - a:
                h = a + t
                break
            t = t - (b - a)
        pc = _piece_for(gp, a, b)
        gh = pc.c0 + pc.c1 * (T.M - h)
        out.append(PlanePoint(gh * halton(i, 3), h))
    return out


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    counterexample: tuple | None = None

    def to_json(self) -> dict:
        out = {"check": self.name, "passed": self.passed, "detail": self.detail}
        if self.counterexample is not None:
            out["counterexample"] = [format_literal(QuadraticNumber.coerce(c)) for c in self.counterexample]
        return out


@dataclass
class VerificationReport:
    checks: list[CheckResult] = field(default_factory=list)
    points_checked: int = 0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self) -> dict:
        return {"passed": self.passed, "points_checked": self.points_checked,
                "checks": [c.to_json() for c in self.checks]}


def _edges(r):
    return [(r[i], r[(i + 1) % len(r)]) for i in range(len(r))]


def _segment_on_boundary(seg, region) -> bool:
    return bool(_overlaps([seg], _edges(region)))


def _shared_edges(r1, r2):
    """Positive-length overlaps of an edge of r1 with an edge of r2."""
    return _overlaps(_edges(r1), _edges(r2))


def _overlaps(segs1, segs2):
    out = []
    for p, q in segs1:
        dx, dy = q[0] - p[0], q[1] - p[1]
        if dx == 0 and dy == 0:
            continue
        for r, s in segs2:
            if (dx * (r[1] - p[1]) - dy * (r[0] - p[0])) or (dx * (s[1] - p[1]) - dy * (s[0] - p[0])):
                continue
            nn = dx * dx + dy * dy
            tr = (dx * (r[0] - p[0]) + dy * (r[1] - p[1])) / nn
            ts = (dx * (s[0] - p[0]) + dy * (s[1] - p[1])) / nn
            lo = max(min(tr, ts), QuadraticNumber(0))
            hi = min(max(tr, ts), QuadraticNumber(1))
            if lo < hi:
                out.append((PlanePoint(p[0] + dx * lo, p[1] + dy * lo), PlanePoint(p[0] + dx * hi, p[1] + dy * hi)))
    return out


def _seam_power(D: AffinePiece, C: NodalChart, a, b) -> int | None:
    """If the affine map D equals (u, h) -> (u + p g(h), h) on heights [a, b], return p."""
    L = D.linear
    if (L.a, L.c, L.d) != (1, 0, 1) or D.shift[1] != 0:
        return None
    ps = []
    for h in (a, b):
        val = (D.shift[0] + L.b * h) / C.width(h)
        if not val.is_integer():
            return None
        ps.append(int(val.a))
    return ps[0] if ps[0] == ps[1] else None


def _compose_pieces(p1: AffinePiece, p2: AffinePiece) -> AffinePiece:
    L = p1.linear @ p2.linear
    sx, sy = p1.linear.apply(p2.shift)
    return AffinePiece(p2.region, L, (sx + p1.shift[0], sy + p1.shift[1]))


def _inverse_piece(p: AffinePiece) -> AffinePiece:
    return inverse(PiecewiseUnimodularMap((p,))).pieces[0]


def verify_iso(m: PiecewiseUnimodularMap, C: NodalChart, samples: int = 1000) -> VerificationReport:
    """Check that m is an integral affine isomorphism acting as 2(M - h) clockwise."""
    T = C.type
    rep = VerificationReport()
    domain = chart_domain(T)
    domain_area = sum((polygon_area(r) for r in domain), QuadraticNumber(0))

    # (a) unimodular linear parts
    bad = [i for i, p in enumerate(m.pieces) if p.linear.det not in (1, -1)]
    rep.checks.append(CheckResult(
        "unimodular", not bad,
        f"{len(m.pieces)} pieces" + (f"; determinant {m.pieces[bad[0]].linear.det} on piece {bad[0]}" if bad else ""),
        tuple(m.pieces[bad[0]].region[0]) if bad else None))
    unimodular = not bad

    # (b) tiling of domain and codomain
    problems = []
    for which, regions in (("domain", [p.region for p in m.pieces]),
                           ("codomain", [p.image_region() for p in m.pieces])):
        total = sum((polygon_area(r) for r in regions), QuadraticNumber(0))
        if total != domain_area:
            problems.append(f"{which} area {total} != {domain_area}")
        for i, r in enumerate(regions):
            if not any(all(point_in_convex(D, v) for v in r) for D in domain):
                problems.append(f"{which} piece {i} leaves the chart domain")
            for j in range(i + 1, len(regions)):
                over = convex_intersection(r, regions[j])
                if len(over) >= 3 and polygon_area(over) > 0:
                    problems.append(f"{which} pieces {i} and {j} overlap")
    rep.checks.append(CheckResult("tiling", not problems, "; ".join(problems[:3]) or "pieces tile domain and codomain"))

    # (c) edge compatibility: adjacent pieces differ by a power of the seam gluing
    problems = []
    edges_checked = 0
    if unimodular:
        intervals = T.excluded.admissible()

        def interval_of(pt):
            for a, b in intervals:
                if a <= pt[1] <= b:
                    return a, b
            return None

        for i, pi in enumerate(m.pieces):
            for j, pj in enumerate(m.pieces):
                if j <= i:
                    continue
                for e in _shared_edges(pi.region, pj.region):
                    edges_checked += 1
                    D = _compose_pieces(pi, _inverse_piece(pj))
                    ab = interval_of(e[0])
                    if ab is None or _seam_power(D, C, *ab) is None:
                        problems.append(f"pieces {i}, {j} disagree along an internal edge")
        # across the seam u = 0 ~ u = g(h) of the domain
        for i, pi in enumerate(m.pieces):
            for j, pj in enumerate(m.pieces):
                for p, q in zip(pi.region, pi.region[1:] + pi.region[:1]):
                    if p[0] != 0 or q[0] != 0:
                        continue
                    ab = interval_of(p)
                    if ab is None:
                        continue
                    # image of the left edge under the seam gluing
                    pg = PlanePoint(C.width(p[1]), p[1])
                    qg = PlanePoint(C.width(q[1]), q[1])
                    if not _segment_on_boundary((pg, qg), pj.region):
                        continue
                    edges_checked += 1
                    a, b = ab
                    glue = _seam_affine(C, a, b)
                    D = _compose_pieces(pj, _compose_pieces(glue, _inverse_piece(pi)))
                    if _seam_power(D, C, a, b) is None:
                        problems.append(f"pieces {i}, {j} disagree across the seam")
    # boundary consistency on vertices: every containing piece gives the same point of the level circle
    for i, p in enumerate(m.pieces):
        for v in p.region:
            imgs = {C.normalize(pc(v)[0], v[1]) for pc in m.pieces if pc.contains(v)}
            if len(imgs) > 1:
                problems.append(f"vertex ({v[0]}, {v[1]}) of piece {i} has {len(imgs)} images")
    rep.checks.append(CheckResult(
        "edge_compatibility", unimodular and not problems,
        ("; ".join(problems[:3]) if problems else f"{edges_checked} shared edges agree up to seam monodromy")
        if unimodular else "skipped: non-unimodular pieces"))

    # sample set: low-discrepancy points plus all piece vertices and edge midpoints
    pts = list(sample_points(T, samples))
    for p in m.pieces:
        r = p.region
        pts.extend(r)
        pts.extend(PlanePoint((r[k][0] + r[(k + 1) % len(r)][0]) / 2, (r[k][1] + r[(k + 1) % len(r)][1]) / 2)
                   for k in range(len(r)))
    rep.points_checked = len(pts)

    # (d) heights preserved, (e) agreement with the circle action
    bad_h = bad_t = None
    for x in pts:
        try:
            y = m(x)
        except TauError:
            bad_h = bad_h or x
            continue
        if y[1] != x[1]:
            bad_h = bad_h or x
            continue
        if bad_t is None:
            target = t_action(C, x, 2 * (T.M - x[1]))
            if C.normalize(y[0], y[1]) != target[0]:
                bad_t = x
    rep.checks.append(CheckResult("height_preserved", bad_h is None,
                                  f"{len(pts)} points", tuple(bad_h) if bad_h else None))
    rep.checks.append(CheckResult("circle_action", bad_t is None,
                                  f"m(x) = 2(M - h) . x on {len(pts)} points" if bad_t is None else
                                  "m(x) differs from translation by 2(M - h)", tuple(bad_t) if bad_t else None))
    return rep


def _seam_affine(C: NodalChart, a, b) -> AffinePiece:
    """u -> u + g(h) on the height interval [a, b] (g is linear there)."""
    ga, gb = C.width(a), C.width(b)
    slope = (gb - ga) / (b - a)  # -c1, an integer
    if not slope.is_integer():
        raise TauError("seam gluing is not integral")
    s = int(slope.a)
    return AffinePiece((), IntMatrix(1, s, 0, 1), (ga - s * a, QuadraticNumber(0)))
