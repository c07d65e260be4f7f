"""Canonical types, the level-length function g and rotation numbers.

For a canonical type with hat constant k, ridge height M, width w and parked
node heights alpha_i, the level set at height h has integral affine length

    g(h) = 2w + k(M - h) + sum_i min(h - alpha_i, 0),

so g(M) = 2w, and fibres at height h rotate by rho(h) = 2(M - h) / g(h)
(taken mod 1) under the map built in :mod:`toricrec.tau`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .exactnum import ExactNumError, QuadraticNumber, parse_literal

__all__ = [
    "CanonicalError",
    "InvalidType",
    "OutOfRange",
    "NonpositiveLength",
    "AtRidge",
    "HatClass",
    "EndType",
    "CanonicalType",
    "ExcludedSet",
    "GPiece",
    "RecurrentHeights",
    "k_of",
    "g",
    "g_pieces",
    "rotation_number",
    "raw_rotation",
    "recurrent_heights",
    "canonical_from_json",
    "canonical_to_json",
]


class CanonicalError(ValueError):
    pass


class InvalidType(CanonicalError):
    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class OutOfRange(CanonicalError):
    pass


class NonpositiveLength(InvalidType):
    def __init__(self, h, value):
        super().__init__(f"level length g({h}) = {value} is not positive", field="alphas")
        self.h = h
        self.value = value


class AtRidge(CanonicalError):
    pass


class HatClass(enum.Enum):
    B = "B"
    C = "C"
    D = "D"
    E = "E"

    @property
    def k(self) -> int:
        return _K_TABLE[self]


_K_TABLE = {HatClass.B: 8, HatClass.C: 8, HatClass.D: 7, HatClass.E: 6}


class EndType(enum.Enum):
    TWO = "Two"
    THREE = "Three"

    @property
    def nodes(self) -> int:
        return 2 if self is EndType.TWO else 3


def k_of(hat) -> int:
    return HatClass(hat.value if isinstance(hat, HatClass) else hat).k


def _q(x, name) -> QuadraticNumber:
    try:
        return QuadraticNumber.coerce(x)
    except (ExactNumError, TypeError) as exc:
        raise InvalidType(f"{name}: {exc}", field=name) from exc


@dataclass(frozen=True)
class CanonicalType:
    hat: HatClass
    M: QuadraticNumber
    w: QuadraticNumber
    alphas: tuple[QuadraticNumber, ...] = ()
    epsilon: QuadraticNumber = field(default_factory=lambda: QuadraticNumber(Fraction(1, 100)))
    d: int | None = None
    end_types: tuple[EndType, EndType] = (EndType.TWO, EndType.TWO)

    def __post_init__(self):
        hat = self.hat if isinstance(self.hat, HatClass) else HatClass(self.hat)
        M = _q(self.M, "M")
        w = _q(self.w, "w")
        eps = _q(self.epsilon, "epsilon")
        alphas = tuple(sorted((_q(a, "alphas") for a in self.alphas), reverse=True))
        ends = tuple(e if isinstance(e, EndType) else EndType(e) for e in self.end_types)
        if len(ends) != 2:
            raise InvalidType("end_types must name exactly two ridge ends", field="end_types")
        d = self.d
        for name, x in [("M", M), ("w", w), ("epsilon", eps)] + [("alphas", a) for a in alphas]:
            if x.d is not None:
                if d is None:
                    d = x.d
                elif x.d != d:
                    raise InvalidType(f"{name} = {x} is not in Q(sqrt({d}))", field=name)
        if not M > 0:
            raise InvalidType("M must be positive", field="M")
        if w < 0:
            raise InvalidType("w must be >= 0", field="w")
        if not (0 < eps < M):
            raise InvalidType("epsilon must satisfy 0 < epsilon < M", field="epsilon")
        for a in alphas:
            if not (0 < a < M):
                raise InvalidType(f"parked height alpha = {a} must satisfy 0 < alpha < M", field="alphas")
            if not a < M - eps:
                raise InvalidType(
                    f"parked height alpha = {a} must lie below the hat, alpha < M - epsilon", field="alphas"
                )
        object.__setattr__(self, "hat", hat)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "end_types", ends)
        object.__setattr__(self, "d", d)
        # g is piecewise linear, so positivity on [0, M) is decided at 0 and the breakpoints
        for h in (QuadraticNumber(0),) + alphas:
            val = g(self, h)
            if val <= 0:
                raise NonpositiveLength(h, val)

    @property
    def k(self) -> int:
        return self.hat.k

    @property
    def n(self) -> int:
        return len(self.alphas)

    @property
    def hat_node_count(self) -> int:
        return sum(e.nodes for e in self.end_types)

    @property
    def excluded(self) -> "ExcludedSet":
        return ExcludedSet.of(self)

    def replace(self, **kw) -> "CanonicalType":
        vals = dict(hat=self.hat, M=self.M, w=self.w, alphas=self.alphas, epsilon=self.epsilon,
                    d=self.d, end_types=self.end_types)
        vals.update(kw)
        return CanonicalType(**vals)


@dataclass(frozen=True)
class ExcludedSet:
    """Union of the epsilon-neighbourhoods of M and the alpha_i inside [0, M]."""

    M: QuadraticNumber
    centers: tuple[QuadraticNumber, ...]
    epsilon: QuadraticNumber

    @classmethod
    def of(cls, T: CanonicalType) -> "ExcludedSet":
        return cls(T.M, (T.M,) + T.alphas, T.epsilon)

    def contains(self, h) -> bool:
        h = QuadraticNumber.coerce(h)
        return any(abs(h - c) < self.epsilon for c in self.centers)

    __contains__ = contains

    def intervals(self) -> list[tuple[QuadraticNumber, QuadraticNumber]]:
        """The open neighbourhoods, clipped to [0, M] and merged."""
        raw = sorted((max(c - self.epsilon, QuadraticNumber(0)), min(c + self.epsilon, self.M))
                     for c in self.centers)
        out: list[list[QuadraticNumber]] = []
        for lo, hi in raw:
            if out and lo < out[-1][1]:
                out[-1][1] = max(out[-1][1], hi)
            else:
                out.append([lo, hi])
        return [(lo, hi) for lo, hi in out]

    def admissible(self) -> list[tuple[QuadraticNumber, QuadraticNumber]]:
        """Closed intervals of positive length making up [0, M] minus U."""
        out = []
        cursor = QuadraticNumber(0)
        for lo, hi in self.intervals():
            if lo > cursor and not self.contains(cursor):
                out.append((cursor, lo))
            cursor = max(cursor, hi)
        return out


def g(T: CanonicalType, h) -> QuadraticNumber:
    h = QuadraticNumber.coerce(h)
    if h < 0 or h > T.M:
        raise OutOfRange(f"h = {h} is outside [0, {T.M}]")
    out = 2 * T.w + T.k * (T.M - h)
    for a in T.alphas:
        if h < a:
            out = out + (h - a)
    return out


@dataclass(frozen=True)
class GPiece:
    """On [lo, hi], g(h) = c0 + c1*(M - h); c1 is an integer."""

    lo: QuadraticNumber
    hi: QuadraticNumber
    c0: QuadraticNumber
    c1: int


def g_pieces(T: CanonicalType) -> list[GPiece]:
    """Linear pieces of g, ordered by increasing height."""
    cuts = sorted(set(T.alphas))
    bounds = [QuadraticNumber(0)] + cuts + [T.M]
    out = []
    for lo, hi in zip(bounds, bounds[1:]):
        if lo == hi:
            continue
        active = [a for a in T.alphas if a >= hi]
        c0 = 2 * T.w
        for a in active:
            c0 = c0 + (T.M - a)
        out.append(GPiece(lo, hi, c0, T.k - len(active)))
    return out


def raw_rotation(T: CanonicalType, h) -> QuadraticNumber:
    """2(M - h) / g(h) before reduction mod 1."""
    h = QuadraticNumber.coerce(h)
    if h == T.M:
        raise AtRidge("the rotation number is undefined on the ridge")
    val = g(T, h)
    if val <= 0:
        raise NonpositiveLength(h, val)
    return 2 * (T.M - h) / val


def rotation_number(T: CanonicalType, h) -> QuadraticNumber:
    """Rotation number of the level circle at height h, reduced into [0, 1)."""
    return raw_rotation(T, h).frac()


@dataclass(frozen=True)
class RecurrentHeights:
    points: tuple[tuple[QuadraticNumber, Fraction], ...]
    # height ranges [lo, hi) on which rho is constant and rational
    intervals: tuple[tuple[QuadraticNumber, QuadraticNumber, Fraction], ...] = ()

    @property
    def whole_interval(self) -> bool:
        return bool(self.intervals)


def recurrent_heights(T: CanonicalType, q_max: int) -> RecurrentHeights:
    """All heights in [0, M) whose rotation number is p/q with q <= q_max.

    On a piece where g = c0 + c1 s (s = M - h) the equation 2s = r*g is linear
    in s; each candidate rational r in the range of 2s/g over the piece gives
    at most one height.
    """
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    points: dict[QuadraticNumber, Fraction] = {}
    intervals = []
    for pc in g_pieces(T):
        s_lo = T.M - pc.hi  # may be 0 on the top piece
        s_hi = T.M - pc.lo
        if not pc.c0:
            r = Fraction(2, pc.c1)
            fr = r - math.floor(r)
            if fr.denominator <= q_max:
                intervals.append((pc.lo, pc.hi, fr))
            continue
        ends = [2 * s / (pc.c0 + pc.c1 * s) for s in (s_lo, s_hi)]
        r_lo, r_hi = min(ends), max(ends)
        for q in range(1, q_max + 1):
            for P in range(math.ceil(q * r_lo), math.floor(q * r_hi) + 1):
                if math.gcd(P, q) != 1:
                    continue
                r = Fraction(P, q)
                den = 2 - r * pc.c1
                if den == 0:
                    continue
                s = r * pc.c0 / den
                if s < s_lo or s > s_hi or s <= 0:
                    continue
                h = T.M - s
                if h < 0:
                    continue
                points.setdefault(h, r - math.floor(r))
    return RecurrentHeights(tuple(sorted(points.items(), key=lambda kv: kv[0])), tuple(intervals))


# -----------------------------------------------------------------------------
# JSON


def canonical_from_json(obj: dict) -> CanonicalType:
    if not isinstance(obj, dict):
        raise InvalidType("a canonical type must be a JSON object")
    for key in ("hat_class", "M", "w"):
        if key not in obj:
            raise InvalidType(f"missing required field {key!r}", field=key)
    try:
        hat = HatClass(obj["hat_class"])
    except ValueError:
        raise InvalidType(f"unknown hat class {obj['hat_class']!r} (expected B, C, D or E)",
                          field="hat_class") from None
    d = obj.get("d")
    if d is not None and not isinstance(d, int):
        raise InvalidType("d must be an integer", field="d")

    def num(key, text):
        try:
            x = parse_literal(text)
        except ExactNumError as exc:
            raise InvalidType(f"{key}: {exc}", field=key) from exc
        if x.d is not None and d is not None and x.d != d:
            raise InvalidType(f"{key} = {text!r} is not in Q(sqrt({d}))", field=key)
        return x

    ends = obj.get("end_types", ["Two", "Two"])
    try:
        ends = tuple(EndType(e) for e in ends)
    except ValueError:
        raise InvalidType(f"end_types entries must be 'Two' or 'Three', got {ends!r}",
                          field="end_types") from None
    try:
        return CanonicalType(
            hat=hat,
            M=num("M", obj["M"]),
            w=num("w", obj["w"]),
            alphas=tuple(num("alphas", a) for a in obj.get("alphas", [])),
            epsilon=num("epsilon", obj.get("epsilon", "1/100")),
            d=d,
            end_types=ends,
        )
    except ExactNumError as exc:
        raise InvalidType(str(exc)) from exc


def canonical_to_json(T: CanonicalType) -> dict:
    return {
        "hat_class": T.hat.value,
        "M": str(T.M),
        "w": str(T.w),
        "alphas": [str(a) for a in T.alphas],
        "d": T.d,
        "epsilon": str(T.epsilon),
        "end_types": [e.value for e in T.end_types],
    }
