"""Exact arithmetic: rationals, one quadratic extension, verified interpolation.

Rationals are :class:`fractions.Fraction`; it is already canonical
(reduced, positive denominator) so equal values compare and hash equal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DuplicateAbscissa, ParseError, UnverifiedFit, ValidationError

Rational = Fraction


def as_fraction(x) -> Fraction:
    """Coerce an int, Fraction or ``"p/q"`` string to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ParseError(f"not a rational: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a rational: {x!r}") from exc
    raise ParseError(f"not a rational: {x!r}")


def format_rational(q) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _is_squarefree(d: int) -> bool:
    if d < 1:
        return False
    p = 2
    while p * p <= d:
        if d % (p * p) == 0:
            return False
        p += 1
    return True


def _sign(x) -> int:
    return (x > 0) - (x < 0)


@dataclass(frozen=True)
class QuadExt:
    """The real number ``a + b*sqrt(d)`` with ``d`` square-free."""

    a: Fraction
    b: Fraction
    d: int

    def __post_init__(self):
        object.__setattr__(self, "a", as_fraction(self.a))
        object.__setattr__(self, "b", as_fraction(self.b))
        if not isinstance(self.d, int) or not _is_squarefree(self.d):
            raise ValidationError(f"d must be a positive square-free integer, got {self.d!r}")

    def sign(self) -> int:
        sa, sb = _sign(self.a), _sign(self.b)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with b^2 d
        lhs, rhs = self.a * self.a, self.b * self.b * self.d
        if lhs > rhs:
            return sa
        if lhs < rhs:
            return sb
        return 0

    def _coerce(self, other) -> QuadExt:
        if isinstance(other, QuadExt):
            if other.d != self.d and other.b != 0 and self.b != 0:
                raise ValueError("QuadExt values live in different extensions")
            return other
        return QuadExt(as_fraction(other), Fraction(0), self.d)

    def __add__(self, other):
        o = self._coerce(other)
        d = self.d if self.b != 0 else o.d
        return QuadExt(self.a + o.a, self.b + o.b, d)

    __radd__ = __add__

    def __neg__(self):
        return QuadExt(-self.a, -self.b, self.d)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, QuadExt):
            o = self._coerce(other)
            d = self.d if self.b != 0 else o.d
            return QuadExt(self.a * o.a + self.b * o.b * d, self.a * o.b + self.b * o.a, d)
        c = as_fraction(other)
        return QuadExt(self.a * c, self.b * c, self.d)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, (QuadExt, int, Fraction)):
            return NotImplemented
        return (self - other).sign() == 0

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __floor__(self):
        return floor_quad(self)

    def to_json(self) -> dict:
        return {"a": format_rational(self.a), "b": format_rational(self.b), "d": self.d}

    @classmethod
    def from_json(cls, obj) -> QuadExt:
        try:
            return cls(as_fraction(obj["a"]), as_fraction(obj["b"]), int(obj["d"]))
        except (KeyError, TypeError) as exc:
            raise ParseError(f"bad QuadExt: {obj!r}") from exc


def floor_quad(x: QuadExt) -> int:
    """Greatest integer <= a + b*sqrt(d), using integer comparisons only."""
    s = math.isqrt(math.floor(x.b * x.b * x.d))
    n = math.floor(x.a) + (s if x.b >= 0 else -s - 1)
    while (x - n).sign() < 0:
        n -= 1
    while (x - (n + 1)).sign() >= 0:
        n += 1
    return n


# -- polynomials (coefficient tuples, lowest degree first) -------------------


def _trim(coeffs: Sequence[Fraction]) -> tuple[Fraction, ...]:
    coeffs = list(coeffs)
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs) if coeffs else (Fraction(0),)


def poly_eval(coeffs: Sequence[Fraction], x) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_mul(p: Sequence[Fraction], q: Sequence[Fraction]) -> tuple[Fraction, ...]:
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return _trim(out)


def poly_degree(coeffs: Sequence[Fraction]) -> int:
    """Degree, with -1 for the zero polynomial."""
    c = _trim(coeffs)
    if len(c) == 1 and c[0] == 0:
        return -1
    return len(c) - 1


def laurent_coefficients(num: Sequence[Fraction], den: Sequence[Fraction],
                         lowest_power: int) -> dict[int, Fraction]:
    """Expand num(k)/den(k) at k = infinity down to ``k**lowest_power``.

    Returns a mapping power -> coefficient for every power from the leading
    one (deg num - deg den) down to ``lowest_power``; powers above the leading
    one are absent and mean zero.
    """
    dn, dd = poly_degree(num), poly_degree(den)
    if dd < 0:
        raise ZeroDivisionError("zero denominator")
    out = {}
    if dn < 0:
        return {}
    lead = Fraction(den[dd])
    # long division in descending powers: remainder r(k) kept as dict power -> coeff
    rem = {i: Fraction(c) for i, c in enumerate(num) if c != 0}
    top = dn - dd
    for p in range(top, lowest_power - 1, -1):
        c = rem.get(p + dd, Fraction(0)) / lead
        out[p] = c
        if c != 0:
            for i in range(dd + 1):
                key = p + i
                rem[key] = rem.get(key, Fraction(0)) - c * den[i]
    return out


@dataclass(frozen=True)
class FitPolynomial:
    """An exactly interpolated polynomial plus its held-out verification."""

    coefficients: tuple[Fraction, ...]
    sample_points: tuple[tuple[int, Fraction], ...]
    holdout_points: tuple[tuple[int, Fraction], ...]
    verified: bool = field(default=False)

    def __call__(self, k) -> Fraction:
        return poly_eval(self.coefficients, k)

    @property
    def degree(self) -> int:
        return poly_degree(self.coefficients)

    def coefficient(self, i: int) -> Fraction:
        return self.coefficients[i] if 0 <= i < len(self.coefficients) else Fraction(0)

    def to_json(self) -> dict:
        return {
            "coefficients": [format_rational(c) for c in self.coefficients],
            "samples": [[k, format_rational(v)] for k, v in self.sample_points],
            "holdout": [[k, format_rational(v)] for k, v in self.holdout_points],
            "verified": self.verified,
        }


def interpolate(samples: Iterable[tuple[int, object]], degree: int,
                holdout: Iterable[tuple[int, object]]) -> FitPolynomial:
    """Unique polynomial of degree <= ``degree`` through ``samples``.

    A holdout mismatch is reported through ``verified=False``; the caller
    decides whether to retry at other levels.
    """
    samples = [(int(k), as_fraction(v)) for k, v in samples]
    holdout = [(int(k), as_fraction(v)) for k, v in holdout]
    if len(samples) != degree + 1:
        raise ValueError(f"need exactly {degree + 1} samples, got {len(samples)}")
    if not holdout:
        raise ValueError("holdout must be nonempty")
    xs = [k for k, _ in samples]
    if len(set(xs)) != len(xs):
        raise DuplicateAbscissa(f"repeated abscissa in {xs}")

    # Newton divided differences, then expand the Newton form.
    n = len(samples)
    table = [v for _, v in samples]
    newton = [table[0]]
    for level in range(1, n):
        table = [(table[i + 1] - table[i]) / (xs[i + level] - xs[i]) for i in range(n - level)]
        newton.append(table[0])
    coeffs: tuple[Fraction, ...] = (Fraction(0),)
    for i in range(n - 1, -1, -1):
        coeffs = poly_mul(coeffs, (Fraction(-xs[i]), Fraction(1)))
        coeffs = _trim((coeffs[0] + newton[i],) + coeffs[1:])

    verified = all(poly_eval(coeffs, k) == v for k, v in holdout)
    return FitPolynomial(coeffs, tuple(samples), tuple(holdout), verified)


def leading_coefficient(p: FitPolynomial, expected_degree: int) -> Fraction:
    if not p.verified:
        raise UnverifiedFit("refusing to read coefficients of an unverified fit")
    return p.coefficient(expected_degree)
