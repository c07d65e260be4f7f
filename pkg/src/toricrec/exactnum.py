"""Exact arithmetic in a real quadratic field Q(sqrt(d)), lattice helpers and
continued fractions.

Nothing in here touches floating point except ``float(x)``, which exists for
rendering only.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Iterator, NamedTuple, Union

__all__ = [
    "ExactNumError",
    "MixedFieldError",
    "IrrationalDirection",
    "NonPrimitive",
    "PeriodNotFoundWithin",
    "QuadraticNumber",
    "LatticeVector",
    "UnimodularMatrix",
    "PlanePoint",
    "ContinuedFraction",
    "qn",
    "parse_literal",
    "format_literal",
    "is_squarefree",
    "det",
    "primitive_decompose",
    "monodromy",
    "continued_fraction",
    "cf_terms",
    "convergents",
    "min_return_distance",
    "dist_to_int",
]


class ExactNumError(ValueError):
    pass


class MixedFieldError(ExactNumError):
    pass


class IrrationalDirection(ExactNumError):
    pass


class NonPrimitive(ExactNumError):
    pass


class PeriodNotFoundWithin(ExactNumError):
    def __init__(self, max_terms: int):
        super().__init__(f"no period detected within {max_terms} terms")
        self.max_terms = max_terms


@lru_cache(maxsize=None)
def is_squarefree(n: int) -> bool:
    if n < 2:
        return False
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 1
    return True


_Rational = Union[int, Fraction]
_ZERO = Fraction(0)


class QuadraticNumber:
    """The real number ``a + b*sqrt(d)`` with rational ``a``, ``b``.

    ``d`` is ``None`` for plain rationals, which mix freely with any field.
    Two numbers tagged with different ``d`` refuse to combine.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a: _Rational = 0, b: _Rational = 0, d: int | None = None):
        a = Fraction(a)
        b = Fraction(b)
        if d is not None:
            if not is_squarefree(d):
                raise ExactNumError(f"d={d} must be a squarefree integer >= 2")
        elif b != 0:
            raise ExactNumError("irrational part given without a field discriminant d")
        self.a = a
        self.b = b
        # a vanishing surd part makes this a plain rational, free to mix
        self.d = d if b else None

    @classmethod
    def _make(cls, a: Fraction, b: Fraction, d: int | None) -> "QuadraticNumber":
        # unchecked fast path for results of field operations
        out = object.__new__(cls)
        out.a = a
        out.b = b
        out.d = d if b else None
        return out

    # -- construction helpers -------------------------------------------------

    @classmethod
    def sqrt(cls, d: int) -> "QuadraticNumber":
        return cls(0, 1, d)

    @classmethod
    def coerce(cls, x) -> "QuadraticNumber":
        if isinstance(x, QuadraticNumber):
            return x
        if isinstance(x, int):
            return cls._make(Fraction(x), _ZERO, None)
        if isinstance(x, Fraction):
            return cls._make(x, _ZERO, None)
        if isinstance(x, str):
            return parse_literal(x)
        raise TypeError(f"cannot convert {type(x).__name__} to QuadraticNumber")

    def _field(self, other: "QuadraticNumber") -> int | None:
        if self.d is None:
            return other.d
        if other.d is None or other.d == self.d:
            return self.d
        raise MixedFieldError(f"cannot combine Q(sqrt({self.d})) with Q(sqrt({other.d}))")

    # -- predicates ---------------------------------------------------------------

    def is_rational(self) -> bool:
        return self.b == 0

    def is_integer(self) -> bool:
        return self.b == 0 and self.a.denominator == 1

    def to_fraction(self) -> Fraction:
        if self.b != 0:
            raise ExactNumError(f"{self} is irrational")
        return self.a

    def conjugate(self) -> "QuadraticNumber":
        return QuadraticNumber(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * (self.d or 0)

    def sign(self) -> int:
        """Exact sign of a + b*sqrt(d) in the real embedding."""
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with b^2 d
        diff = self.a * self.a - self.b * self.b * self.d
        return sa if diff > 0 else sb

    def integer_form(self) -> tuple[int, int, int]:
        """Return integers (A, B, C), C > 0, with self = (A + B*sqrt(d)) / C."""
        c = self.a.denominator * self.b.denominator // math.gcd(self.a.denominator, self.b.denominator)
        return self.a.numerator * (c // self.a.denominator), self.b.numerator * (c // self.b.denominator), c

    def __floor__(self) -> int:
        if self.b == 0:
            return math.floor(self.a)
        A, B, C = self.integer_form()
        r = math.isqrt(B * B * self.d)
        s = r if B > 0 else -r - 1
        return (A + s) // C

    def __ceil__(self) -> int:
        f = math.floor(self)
        return f if self == f else f + 1

    def frac(self) -> "QuadraticNumber":
        return self - math.floor(self)

    # -- arithmetic -----------------------------------------------------------------

    def __add__(self, other):
        try:
            other = QuadraticNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return QuadraticNumber._make(self.a + other.a, self.b + other.b, self._field(other))

    __radd__ = __add__

    def __neg__(self):
        return QuadraticNumber._make(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        try:
            other = QuadraticNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return QuadraticNumber._make(self.a - other.a, self.b - other.b, self._field(other))

    def __rsub__(self, other):
        try:
            other = QuadraticNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        try:
            other = QuadraticNumber.coerce(other)
        except TypeError:
            return NotImplemented
        d = self._field(other)
        a = self.a * other.a
        b = self.a * other.b + self.b * other.a
        if self.b and other.b:
            a += self.b * other.b * d
        return QuadraticNumber._make(a, b, d)

    __rmul__ = __mul__

    def inverse(self) -> "QuadraticNumber":
        if self.b == 0:
            if self.a == 0:
                raise ZeroDivisionError("division by zero in Q(sqrt(d))")
            return QuadraticNumber(1 / self.a, 0, self.d)
        n = self.norm()  # nonzero: sqrt(d) is irrational
        return QuadraticNumber(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        try:
            other = QuadraticNumber.coerce(other)
        except TypeError:
            return NotImplemented
        self._field(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        try:
            other = QuadraticNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return other / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out = QuadraticNumber(1, 0, self.d)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- comparison -------------------------------------------------------------------

    def _cmp(self, other) -> int:
        return (self - other).sign()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        if not isinstance(other, QuadraticNumber):
            return NotImplemented
        if self.b == 0 and other.b == 0:
            return self.a == other.a
        return self.a == other.a and self.b == other.b and self.d == other.d

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __lt__(self, other):
        try:
            return self._cmp(QuadraticNumber.coerce(other)) < 0
        except TypeError:
            return NotImplemented

    def __le__(self, other):
        try:
            return self._cmp(QuadraticNumber.coerce(other)) <= 0
        except TypeError:
            return NotImplemented

    def __gt__(self, other):
        try:
            return self._cmp(QuadraticNumber.coerce(other)) > 0
        except TypeError:
            return NotImplemented

    def __ge__(self, other):
        try:
            return self._cmp(QuadraticNumber.coerce(other)) >= 0
        except TypeError:
            return NotImplemented

    def __bool__(self):
        return self.a != 0 or self.b != 0

    # -- display --------------------------------------------------------------------

    def __float__(self):
        # rendering only
        if self.b == 0:
            return float(self.a)
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __repr__(self):
        return f"QuadraticNumber({format_literal(self)!r})"

    def __str__(self):
        return format_literal(self)


def qn(x, d: int | None = None) -> QuadraticNumber:
    """Shorthand: ``qn("1/2")``, ``qn(3)``, ``qn("1 + 1*sqrt(2)")``."""
    out = QuadraticNumber.coerce(x)
    if d is not None and out.d is None:
        out = QuadraticNumber(out.a, out.b, d)
    return out


_TERM = re.compile(
    r"""(?P<sign>[+-]*)
        (?:
          (?P<num>\d+)(?:/(?P<den>\d+))?(?:\*sqrt\((?P<d1>\d+)\))?
        | sqrt\((?P<d2>\d+)\)
        )""",
    re.VERBOSE,
)


def parse_literal(text: str) -> QuadraticNumber:
    """Parse ``"p/q"``, ``"p/q + r/s*sqrt(d)"`` and their obvious variants."""
    if re.search(r"[\w)]\s+[\w(]", str(text)):
        raise ExactNumError(f"bad number literal {text!r}")
    s = re.sub(r"\s+", "", str(text))
    if not s:
        raise ExactNumError("empty number literal")
    ra = Fraction(0)
    rb = Fraction(0)
    d = None
    pos = 0
    seen_any = False
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos:
            raise ExactNumError(f"bad number literal {text!r}")
        sign = m.group("sign")
        if seen_any and not sign:
            raise ExactNumError(f"bad number literal {text!r}")
        pos = m.end()
        neg = sign.count("-") % 2 == 1
        if m.group("d2") is not None:
            val = Fraction(1)
            dd = int(m.group("d2"))
        else:
            den = int(m.group("den") or 1)
            if den == 0:
                raise ExactNumError(f"zero denominator in {text!r}")
            val = Fraction(int(m.group("num")), den)
            dd = int(m.group("d1")) if m.group("d1") else None
        if neg:
            val = -val
        if dd is None:
            ra += val
        else:
            if d is not None and dd != d:
                raise MixedFieldError(f"two different surds in {text!r}")
            d = dd
            rb += val
        seen_any = True
    if d is not None and not is_squarefree(d):
        raise ExactNumError(f"sqrt({d}) in {text!r}: d must be squarefree >= 2")
    return QuadraticNumber(ra, rb, d if (d is not None) else None)


def format_literal(x: QuadraticNumber) -> str:
    a = str(x.a)
    if x.b == 0:
        return a
    b = abs(x.b)
    surd = f"sqrt({x.d})" if b == 1 else f"{b}*sqrt({x.d})"
    if x.a == 0:
        return surd if x.b > 0 else "-" + surd
    op = "+" if x.b > 0 else "-"
    return f"{a} {op} {surd}"


# -----------------------------------------------------------------------------
# lattice objects


class LatticeVector(NamedTuple):
    x: int
    y: int

    @property
    def primitive(self) -> bool:
        return math.gcd(self.x, self.y) == 1

    def __neg__(self):
        return LatticeVector(-self.x, -self.y)


def det(v, w):
    return v[0] * w[1] - v[1] * w[0]


class PlanePoint(NamedTuple):
    u: QuadraticNumber
    v: QuadraticNumber

    @classmethod
    def of(cls, u, v) -> "PlanePoint":
        return cls(QuadraticNumber.coerce(u), QuadraticNumber.coerce(v))

    def __add__(self, other):
        return PlanePoint(self.u + other[0], self.v + other[1])

    def __sub__(self, other):
        return PlanePoint(self.u - other[0], self.v - other[1])

    def scale(self, t) -> "PlanePoint":
        return PlanePoint(self.u * t, self.v * t)


@dataclass(frozen=True)
class UnimodularMatrix:
    """2x2 integer matrix [[a, b], [c, d]] with determinant +-1."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for e in (self.a, self.b, self.c, self.d):
            if not isinstance(e, int):
                raise ExactNumError("unimodular matrix entries must be integers")
        if self.det not in (1, -1):
            raise ExactNumError(f"determinant {self.det} is not +-1")

    @classmethod
    def of(cls, rows) -> "UnimodularMatrix":
        (a, b), (c, d) = rows
        return cls(a, b, c, d)

    @classmethod
    def identity(cls) -> "UnimodularMatrix":
        return cls(1, 0, 0, 1)

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def rows(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return ((self.a, self.b), (self.c, self.d))

    def inverse(self) -> "UnimodularMatrix":
        s = self.det  # inverse of +-1 is itself
        return UnimodularMatrix(s * self.d, -s * self.b, -s * self.c, s * self.a)

    def apply(self, p):
        x, y = p
        out = (self.a * x + self.b * y, self.c * x + self.d * y)
        if isinstance(p, LatticeVector):
            return LatticeVector(*out)
        if isinstance(p, PlanePoint):
            return PlanePoint(*out)
        return out

    def __matmul__(self, other):
        if isinstance(other, UnimodularMatrix):
            return UnimodularMatrix(
                self.a * other.a + self.b * other.c,
                self.a * other.b + self.b * other.d,
                self.c * other.a + self.d * other.c,
                self.c * other.b + self.d * other.d,
            )
        return self.apply(other)

    def __pow__(self, n: int) -> "UnimodularMatrix":
        base = self if n >= 0 else self.inverse()
        out = UnimodularMatrix.identity()
        for _ in range(abs(n)):
            out = out @ base
        return out


def primitive_decompose(p, q) -> tuple[LatticeVector, QuadraticNumber]:
    """Write q - p = t*u with u primitive and t > 0; t is the lattice length."""
    dx = QuadraticNumber.coerce(q[0]) - p[0]
    dy = QuadraticNumber.coerce(q[1]) - p[1]
    if not dx and not dy:
        raise ExactNumError("zero-length segment")
    if not dx:
        return LatticeVector(0, 1 if dy > 0 else -1), abs(dy)
    ratio = dy / dx
    if not ratio.is_rational():
        raise IrrationalDirection(f"direction ({dx}, {dy}) is not a lattice direction")
    r = ratio.a
    u = LatticeVector(r.denominator, r.numerator)
    t = dx / r.denominator
    if t < 0:
        u, t = -u, -t
    return u, t


def monodromy(v) -> UnimodularMatrix:
    """The node monodromy x -> x + det(v, x) v for primitive eigen direction v."""
    vx, vy = v
    if math.gcd(vx, vy) != 1:
        raise NonPrimitive(f"{tuple(v)} is not primitive")
    return UnimodularMatrix(1 - vx * vy, vx * vx, -vy * vy, 1 + vx * vy)


# -----------------------------------------------------------------------------
# continued fractions


@dataclass(frozen=True)
class ContinuedFraction:
    preperiod: tuple[int, ...]
    period: tuple[int, ...] = ()

    @property
    def is_rational(self) -> bool:
        return not self.period

    def terms(self) -> Iterator[int]:
        yield from self.preperiod
        if self.period:
            while True:
                yield from self.period

    def __str__(self):
        head = list(self.preperiod)
        s = f"[{head[0]}" if head else "["
        rest = head[1:]
        if rest:
            s += "; " + ", ".join(map(str, rest))
        if self.period:
            s += ("; " if not rest else ", ") + "(" + ", ".join(map(str, self.period)) + ")"
        return s + "]"


def _cf_rational(x: Fraction, max_terms: int) -> ContinuedFraction:
    out = []
    p, q = x.numerator, x.denominator
    while q:
        if len(out) >= max_terms:
            raise PeriodNotFoundWithin(max_terms)
        a, r = divmod(p, q)
        out.append(a)
        p, q = q, r
    return ContinuedFraction(tuple(out), ())


def _quadratic_states(x: QuadraticNumber) -> Iterator[tuple[int, tuple[int, int]]]:
    """Lazily yield (a_k, (P_k, Q_k)) for an irrational x = (P + sqrt D)/Q."""
    A, B, C = x.integer_form()
    D = B * B * x.d
    if B > 0:
        P, Q = A, C
    else:
        P, Q = -A, -C
    # arrange Q | D - P^2 so the recurrence stays integral
    if (D - P * P) % Q:
        P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
    r = math.isqrt(D)
    while True:
        a = (P + r) // Q if Q > 0 else (-P - r - 1) // (-Q)
        yield a, (P, Q)
        P = a * Q - P
        Q = (D - P * P) // Q


def continued_fraction(x, max_terms: int = 1_000_000) -> ContinuedFraction:
    """Exact continued fraction of a rational or a quadratic irrational.

    Periodicity is found by repetition of the state (P, Q) in the complete
    quotient (P + sqrt(D)) / Q.  Periods can be long (of order sqrt(D)), hence
    the generous default cap.
    """
    if max_terms < 1:
        raise ValueError("max_terms must be >= 1")
    x = QuadraticNumber.coerce(x)
    if x.is_rational():
        return _cf_rational(x.a, max_terms)
    seen: dict[tuple[int, int], int] = {}
    terms: list[int] = []
    for a, state in _quadratic_states(x):
        if state in seen:
            i = seen[state]
            return ContinuedFraction(tuple(terms[:i]), tuple(terms[i:]))
        if len(terms) == max_terms:
            break
        seen[state] = len(terms)
        terms.append(a)
    raise PeriodNotFoundWithin(max_terms)


def cf_terms(x) -> Iterator[int]:
    """Partial quotients of x, generated lazily (no period detection)."""
    x = QuadraticNumber.coerce(x)
    if x.is_rational():
        yield from _cf_rational(x.a, 1_000_000).terms()
    else:
        for a, _ in _quadratic_states(x):
            yield a


def convergents(cf) -> Iterator[tuple[int, int]]:
    """Yield successive convergents p_k/q_k (possibly infinitely many).

    Accepts a ContinuedFraction or any iterable of partial quotients.
    """
    return _convergents(cf.terms() if isinstance(cf, ContinuedFraction) else cf)


def _convergents(terms) -> Iterator[tuple[int, int]]:
    p0, q0, p1, q1 = 1, 0, 0, 1
    for a in terms:
        p0, q0, p1, q1 = a * p0 + p1, a * q0 + q1, p0, q0
        yield p0, q0


def dist_to_int(x: QuadraticNumber) -> QuadraticNumber:
    f = x.frac()
    return min(f, 1 - f)


def min_return_distance(rho, N: int) -> tuple[int, QuadraticNumber]:
    """argmin and min of ||n*rho|| over 1 <= n <= N.

    Uses the convergent with the largest denominator <= N (best approximations
    of the second kind are exactly the convergents).
    """
    rho = QuadraticNumber.coerce(rho)
    if not (0 < rho < 1):
        raise ValueError("rho must lie in (0, 1)")
    if N < 1:
        raise ValueError("N must be >= 1")
    best = 1
    for _, q in _convergents(cf_terms(rho)):
        if q > N:
            break
        best = q
    return best, dist_to_int(best * rho)
