"""Delzant polygons: height function, ridge, inner parallel bodies.

Besides the polygon type this module holds the small amount of exact convex
geometry (half-plane clipping, areas, containment) the other modules share.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Sequence

from .exactnum import (
    ExactNumError,
    LatticeVector,
    PlanePoint,
    QuadraticNumber,
    det,
    parse_literal,
    primitive_decompose,
)

__all__ = [
    "PolygonError",
    "DegenerateVertex",
    "OutsidePolygon",
    "AboveRidge",
    "Edge",
    "DelzantPolygon",
    "ValidationReport",
    "Ridge",
    "LevelCurve",
    "delzant_check",
    "height",
    "ridge",
    "level_curve",
    "level_length",
    "rectangle",
    "blown_up_rectangle",
    "polygon_from_json",
    "clip_halfplane",
    "polygon_area",
    "convex_intersection",
    "point_in_convex",
    "simplify_polygon",
]


class PolygonError(ValueError):
    pass


class DegenerateVertex(PolygonError):
    pass


class OutsidePolygon(PolygonError):
    pass


class AboveRidge(PolygonError):
    pass


# -----------------------------------------------------------------------------
# exact convex helpers


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def polygon_area(pts: Sequence) -> QuadraticNumber:
    """Signed shoelace area (positive for counter-clockwise)."""
    n = len(pts)
    if n < 3:
        return QuadraticNumber(0)
    s = QuadraticNumber(0)
    for i in range(n):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % n]
        s = s + (x0 * y1 - x1 * y0)
    return s / 2


def simplify_polygon(pts: Sequence) -> list:
    """Drop repeated vertices and vertices lying on the segment between neighbours."""
    out = []
    for p in pts:
        if not out or (out[-1][0] != p[0] or out[-1][1] != p[1]):
            out.append(p)
    while len(out) > 1 and out[0][0] == out[-1][0] and out[0][1] == out[-1][1]:
        out.pop()
    changed = True
    while changed and len(out) >= 3:
        changed = False
        for i in range(len(out)):
            a, b, c = out[i - 1], out[i], out[(i + 1) % len(out)]
            if not _cross(a, b, c):
                del out[i]
                changed = True
                break
    return out


def clip_halfplane(pts: Sequence, a, b, c) -> list:
    """Clip a convex polygon to {(x, y) : a*x + b*y >= c}."""
    out = []
    n = len(pts)
    if n == 0:
        return out
    vals = [a * p[0] + b * p[1] - c for p in pts]
    for i in range(n):
        p, q = pts[i], pts[(i + 1) % n]
        fp, fq = vals[i], vals[(i + 1) % n]
        if fp >= 0:
            out.append(p)
        if (fp > 0 and fq < 0) or (fp < 0 and fq > 0):
            t = fp / (fp - fq)
            out.append(PlanePoint(p[0] + (q[0] - p[0]) * t, p[1] + (q[1] - p[1]) * t))
    return simplify_polygon(out)


def _edge_halfplanes(pts: Sequence):
    # counter-clockwise polygon: inside is left of each edge
    n = len(pts)
    for i in range(n):
        p, q = pts[i], pts[(i + 1) % n]
        dx, dy = q[0] - p[0], q[1] - p[1]
        yield -dy, dx, -dy * p[0] + dx * p[1]


def convex_intersection(p1: Sequence, p2: Sequence) -> list:
    out = list(p1)
    for a, b, c in _edge_halfplanes(p2):
        out = clip_halfplane(out, a, b, c)
        if len(out) < 3:
            return []
    return out


def point_in_convex(pts: Sequence, x) -> bool:
    """Closed containment test for a counter-clockwise convex polygon."""
    for a, b, c in _edge_halfplanes(pts):
        if a * x[0] + b * x[1] < c:
            return False
    return True


def _solve3(rows):
    """Cramer's rule for a 3x3 system [A | rhs]; None when singular."""
    (a1, b1, c1, r1), (a2, b2, c2, r2), (a3, b3, c3, r3) = rows

    def d3(m):
        (p, q, r), (s, t, u), (v, w, x) = m
        return p * (t * x - u * w) - q * (s * x - u * v) + r * (s * w - t * v)

    D = d3(((a1, b1, c1), (a2, b2, c2), (a3, b3, c3)))
    if D == 0:
        return None
    Dx = d3(((r1, b1, c1), (r2, b2, c2), (r3, b3, c3)))
    Dy = d3(((a1, r1, c1), (a2, r2, c2), (a3, r3, c3)))
    Dz = d3(((a1, b1, r1), (a2, b2, r2), (a3, b3, r3)))
    return Dx / D, Dy / D, Dz / D


# -----------------------------------------------------------------------------
# polygons


@dataclass(frozen=True)
class Edge:
    start: PlanePoint
    end: PlanePoint
    direction: LatticeVector
    length: QuadraticNumber
    normal: LatticeVector  # primitive, inward
    support: QuadraticNumber  # edge lies on <normal, x> = support


@dataclass(frozen=True)
class DelzantPolygon:
    vertices: tuple[PlanePoint, ...]
    edges: tuple[Edge, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vs = tuple(PlanePoint.of(*v) for v in self.vertices)
        object.__setattr__(self, "vertices", vs)
        n = len(vs)
        if n < 3:
            raise DegenerateVertex("a polygon needs at least 3 vertices")
        edges = []
        for i in range(n):
            p, q = vs[i], vs[(i + 1) % n]
            if p == q:
                raise DegenerateVertex(f"repeated vertex {i}: ({p.u}, {p.v})")
            try:
                u, t = primitive_decompose(p, q)
            except ExactNumError as exc:
                raise PolygonError(f"edge {i}: {exc}") from exc
            nrm = LatticeVector(-u.y, u.x)
            edges.append(Edge(p, q, u, t, nrm, nrm.x * p.u + nrm.y * p.v))
        for i in range(n):
            turn = det(edges[i - 1].direction, edges[i].direction)
            if turn == 0:
                raise DegenerateVertex(f"vertex {i} is collinear with its neighbours")
            if turn < 0:
                raise PolygonError(f"vertex {i} is reflex or the polygon is clockwise")
        object.__setattr__(self, "edges", tuple(edges))

    @property
    def d(self) -> int | None:
        for v in self.vertices:
            for c in v:
                if c.d is not None:
                    return c.d
        return None

    def area(self) -> QuadraticNumber:
        return polygon_area(self.vertices)

    def contains(self, x) -> bool:
        return all(e.normal.x * x[0] + e.normal.y * x[1] >= e.support for e in self.edges)


@dataclass(frozen=True)
class ValidationReport:
    determinants: tuple[int, ...]

    @property
    def passed(self) -> bool:
        return all(v in (1, -1) for v in self.determinants)

    @property
    def failures(self) -> list[int]:
        return [i for i, v in enumerate(self.determinants) if v not in (1, -1)]


def delzant_check(P: DelzantPolygon) -> ValidationReport:
    """Per-vertex determinant of the two primitive edge directions."""
    es = P.edges
    return ValidationReport(tuple(det(es[i - 1].direction, es[i].direction) for i in range(len(es))))


def height(P: DelzantPolygon, x) -> QuadraticNumber:
    """Integral affine distance from x to the boundary of P."""
    x = PlanePoint.of(*x)
    vals = [e.normal.x * x.u + e.normal.y * x.v - e.support for e in P.edges]
    m = min(vals)
    if m < 0:
        raise OutsidePolygon(f"({x.u}, {x.v}) lies outside the polygon")
    return m


@dataclass(frozen=True)
class Ridge:
    M: QuadraticNumber
    endpoints: tuple[PlanePoint, ...]  # one point, or the two ends of a segment
    width: QuadraticNumber

    @property
    def is_point(self) -> bool:
        return len(self.endpoints) == 1


@lru_cache(maxsize=256)
def ridge(P: DelzantPolygon) -> Ridge:
    """Maximum of the height function and its argmax set.

    Every vertex of the optimal face of ``max t s.t. <n_e, x> >= c_e + t`` is
    cut out by three tight constraints, so enumerating triples is exhaustive.
    """
    es = P.edges
    best = None
    pts: list[PlanePoint] = []
    for e1, e2, e3 in combinations(es, 3):
        sol = _solve3(
            [(e.normal.x, e.normal.y, -1, e.support) for e in (e1, e2, e3)]
        )
        if sol is None:
            continue
        x, y, t = sol
        if any(e.normal.x * x + e.normal.y * y - e.support < t for e in es):
            continue
        p = PlanePoint(x, y)
        if best is None or t > best:
            best, pts = t, [p]
        elif t == best and p not in pts:
            pts.append(p)
    if best is None:
        raise PolygonError("could not locate the ridge")
    if len(pts) == 1:
        return Ridge(best, (pts[0],), QuadraticNumber(0))
    # optimal face is a segment; keep its two extreme points
    pts.sort(key=lambda p: (p.u, p.v))
    lo, hi = pts[0], pts[-1]
    _, w = primitive_decompose(lo, hi)
    return Ridge(best, (lo, hi), w)


@dataclass(frozen=True)
class LevelCurve:
    h: QuadraticNumber
    vertices: tuple[PlanePoint, ...]

    @property
    def segments(self) -> list[tuple[PlanePoint, PlanePoint]]:
        vs = self.vertices
        return [(vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs))]

    def length(self) -> QuadraticNumber:
        total = QuadraticNumber(0)
        for p, q in self.segments:
            total = total + primitive_decompose(p, q)[1]
        return total


def level_curve(P: DelzantPolygon, h) -> LevelCurve:
    """Boundary of the inner parallel body {x : <n_e, x> >= c_e + h}."""
    h = QuadraticNumber.coerce(h)
    if h < 0:
        raise ValueError("height must be >= 0")
    M = ridge(P).M
    if h >= M:
        raise AboveRidge(f"h = {h} is not below the ridge height {M}")
    pts = list(P.vertices)
    for e in P.edges:
        pts = clip_halfplane(pts, e.normal.x, e.normal.y, e.support + h)
    return LevelCurve(h, tuple(pts))


def level_length(P: DelzantPolygon, h) -> QuadraticNumber:
    return level_curve(P, h).length()


# -----------------------------------------------------------------------------
# constructors


def rectangle(a, b) -> DelzantPolygon:
    a, b = QuadraticNumber.coerce(a), QuadraticNumber.coerce(b)
    z = QuadraticNumber(0)
    return DelzantPolygon(((z, z), (a, z), (a, b), (z, b)))


def blown_up_rectangle(a, b, sizes: Sequence) -> DelzantPolygon:
    """Rectangle [0,a]x[0,b] with up to four corners cut by Delzant blow-ups.

    ``sizes`` lists blow-up sizes for the corners (a,b), (0,b), (0,0), (a,0) in
    that order; a size of 0 leaves the corner alone.
    """
    a, b = QuadraticNumber.coerce(a), QuadraticNumber.coerce(b)
    z = QuadraticNumber(0)
    cs = [QuadraticNumber.coerce(c) for c in sizes] + [z] * (4 - len(sizes))
    c_tr, c_tl, c_bl, c_br = cs
    pts = []

    def corner(p, before, after, c):
        if c:
            pts.append(PlanePoint(p[0] + before[0] * c, p[1] + before[1] * c))
            pts.append(PlanePoint(p[0] + after[0] * c, p[1] + after[1] * c))
        else:
            pts.append(PlanePoint(*p))

    corner((z, z), (0, 1), (1, 0), c_bl)
    corner((a, z), (-1, 0), (0, 1), c_br)
    corner((a, b), (0, -1), (-1, 0), c_tr)
    corner((z, b), (1, 0), (0, -1), c_tl)
    return DelzantPolygon(tuple(pts))


def polygon_from_json(obj: dict) -> DelzantPolygon:
    d = obj.get("d")
    verts = []
    for v in obj["vertices"]:
        x, y = (parse_literal(c) for c in v)
        for c in (x, y):
            if c.d is not None and d is not None and c.d != d:
                raise PolygonError(f"coordinate {c} is not in Q(sqrt({d}))")
        verts.append(PlanePoint(x, y))
    return DelzantPolygon(tuple(verts))
