"""Nodal charts in fundamental-domain coordinates (u, h).

``h`` is the height and ``u`` the integral affine length along the level set
from the reference segment, measured counter-clockwise, so the chart domain is
{0 <= u < g(h), 0 <= h <= M} with u = 0 and u = g(h) glued.

Conventions (the chart is affine away from the seam, the ridge and the cuts):

* hat nodes sit at height M - eps/2, eigen direction (0, 1), cut running up to
  the ridge;
* parked node i sits at height alpha_i, eigen direction (1, 0) (tangent to the
  level circle it slides along), cut running along the level to the seam.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .canonical import CanonicalType, EndType, canonical_from_json, canonical_to_json, g
from .exactnum import LatticeVector, PlanePoint, QuadraticNumber, monodromy, parse_literal

__all__ = [
    "ChartError",
    "CutCrossing",
    "ZeroWidth",
    "AboveNodes",
    "Node",
    "NodalChart",
    "TangleEndpoints",
    "natural_chart",
    "make_s2xs2",
    "slide_parked_left",
    "tangle_endpoints",
    "wedge_level_length",
    "chart_to_json",
    "chart_from_json",
]

HAT_EIGEN = LatticeVector(0, 1)
PARKED_EIGEN = LatticeVector(1, 0)


class ChartError(ValueError):
    pass


class CutCrossing(ChartError):
    pass


class ZeroWidth(ChartError):
    pass


class AboveNodes(ChartError):
    pass


@dataclass(frozen=True)
class Node:
    u: QuadraticNumber
    h: QuadraticNumber
    eigen: LatticeVector
    tag: str

    @property
    def position(self) -> PlanePoint:
        return PlanePoint(self.u, self.h)

    @property
    def is_parked(self) -> bool:
        return self.tag.startswith("parked:")

    @property
    def parked_index(self) -> int:
        return int(self.tag.split(":")[1])


@dataclass(frozen=True)
class NodalChart:
    type: CanonicalType
    nodes: tuple[Node, ...]

    def width(self, h) -> QuadraticNumber:
        return g(self.type, h)

    def normalize(self, u, h) -> QuadraticNumber:
        """Reduce u into [0, g(h))."""
        gh = self.width(h)
        u = QuadraticNumber.coerce(u)
        if 0 <= u < gh:
            return u
        return u - gh * ((u / gh).__floor__())

    def in_domain(self, u, h) -> bool:
        h = QuadraticNumber.coerce(h)
        return 0 <= h <= self.type.M and 0 <= u < self.width(h)

    def cut(self, node: Node) -> tuple[PlanePoint, PlanePoint]:
        if node.is_parked:
            return node.position, PlanePoint(self.width(node.h), node.h)
        return node.position, PlanePoint(node.u, self.type.M)

    def cuts(self) -> list[tuple[PlanePoint, PlanePoint]]:
        return [self.cut(n) for n in self.nodes]

    @property
    def parked(self) -> list[Node]:
        return [n for n in self.nodes if n.is_parked]

    @property
    def hat(self) -> list[Node]:
        return [n for n in self.nodes if not n.is_parked]

    def parked_node(self, i: int) -> Node:
        for n in self.nodes:
            if n.is_parked and n.parked_index == i:
                return n
        raise ChartError(f"no parked node with index {i}")


@dataclass(frozen=True)
class TangleEndpoints:
    start: NodalChart
    end: NodalChart


# -----------------------------------------------------------------------------


def _segments_cross(s1, s2) -> bool:
    """Closed segments meet, except when they are the identical segment."""
    (p, q), (r, s) = s1, s2
    if p == r and q == s:
        return False

    def orient(a, b, c):
        return ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).sign()

    def on_seg(a, b, c):
        return min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])

    o1, o2, o3, o4 = orient(p, q, r), orient(p, q, s), orient(r, s, p), orient(r, s, q)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    return ((o1 == 0 and on_seg(p, q, r)) or (o2 == 0 and on_seg(p, q, s))
            or (o3 == 0 and on_seg(r, s, p)) or (o4 == 0 and on_seg(r, s, q)))


def check_cuts(chart: NodalChart) -> None:
    cuts = chart.cuts()
    for i in range(len(cuts)):
        for j in range(i + 1, len(cuts)):
            if _segments_cross(cuts[i], cuts[j]):
                a, b = chart.nodes[i], chart.nodes[j]
                raise CutCrossing(f"cut of {a.tag} meets cut of {b.tag}")


def _hat_nodes(T: CanonicalType) -> list[Node]:
    h = T.M - T.epsilon / 2
    gh = g(T, h)
    half = T.epsilon / 2
    ends = (QuadraticNumber(0), gh / 2)
    nodes = []
    for e_idx, (end, etype) in enumerate(zip(ends, T.end_types)):
        offsets = (-half, half) if etype is EndType.TWO else (-half, QuadraticNumber(0), half)
        for j, off in enumerate(offsets):
            u = end + off
            if u < 0:
                u = u + gh
            nodes.append(Node(u, h, HAT_EIGEN, f"hat:{e_idx}:{j}"))
    return nodes


def natural_chart(T: CanonicalType) -> NodalChart:
    nodes = _hat_nodes(T)
    for i, a in enumerate(T.alphas, start=1):
        nodes.append(Node(QuadraticNumber(0), a, PARKED_EIGEN, f"parked:{i}"))
    chart = NodalChart(T, tuple(nodes))
    check_cuts(chart)
    return chart


def make_s2xs2(M, w, epsilon) -> NodalChart:
    """Chart for the non-monotone product of spheres with areas 2M + w and 2M."""
    return natural_chart(CanonicalType("B", M, w, (), epsilon))


def slide_parked_left(C: NodalChart, i: int) -> NodalChart:
    """Slide parked node i (1-based) clockwise along its level by 2(M - alpha_i)."""
    old = C.parked_node(i)
    new = replace(old, u=C.normalize(old.u - 2 * (C.type.M - old.h), old.h))
    chart = NodalChart(C.type, tuple(new if n is old else n for n in C.nodes))
    check_cuts(chart)
    return chart


def tangle_endpoints(T: CanonicalType) -> TangleEndpoints:
    if not T.w > 0:
        raise ZeroWidth("the ridge-end tangles need a hat of positive width")
    start = natural_chart(T)
    # hat nodes of either end type move with the level translation by 2(M - h);
    # parked nodes all slide at once (tied heights would collide one at a time)
    moved = tuple(replace(n, u=start.normalize(n.u - 2 * (T.M - n.h), n.h)) for n in start.nodes)
    end = NodalChart(T, moved)
    check_cuts(end)
    return TangleEndpoints(start, end)


def wedge_level_length(C: NodalChart, h) -> QuadraticNumber:
    """Level length read off the embedded chart with monodromy wedges removed.

    Below each parked node the chart omits the wedge between the downward ray
    and its image under the inverse node monodromy; at depth alpha - h that
    wedge is (alpha - h) wide in lattice units.
    """
    T = C.type
    h = QuadraticNumber.coerce(h)
    if h < 0:
        raise ValueError("h must be >= 0")
    if any(h >= n.h for n in C.hat) or h > T.M - T.epsilon:
        raise AboveNodes(f"h = {h} reaches the hat nodes")
    total = 2 * T.w + T.k * (T.M - h)
    down = (0, -1)
    for n in C.parked:
        if h >= n.h:
            continue
        other = monodromy(n.eigen).inverse().apply(down)
        depth = n.h - h
        # both rays leave the node and drop at unit rate
        x1 = n.u + depth * down[0]
        x2 = n.u + depth * other[0] / (-other[1])
        total = total - abs(x2 - x1)
    return total


# -----------------------------------------------------------------------------
# JSON


def chart_to_json(C: NodalChart) -> dict:
    return {
        "type": canonical_to_json(C.type),
        "nodes": [
            {"u": str(n.u), "h": str(n.h), "eigen": [n.eigen.x, n.eigen.y], "tag": n.tag}
            for n in C.nodes
        ],
    }


def chart_from_json(obj: dict) -> NodalChart:
    T = canonical_from_json(obj["type"])
    nodes = []
    for n in obj["nodes"]:
        ex, ey = n["eigen"]
        nodes.append(Node(parse_literal(n["u"]), parse_literal(n["h"]), LatticeVector(ex, ey), n["tag"]))
    chart = NodalChart(T, tuple(nodes))
    check_cuts(chart)
    return chart
