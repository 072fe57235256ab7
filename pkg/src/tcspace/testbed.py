"""Polarized toric varieties on which every invariant is computable exactly.

Sections of kL are the lattice points of the dilate kP. A monomial test
configuration of exponent r is a trace-zero weight on the points of rP; its
weight on a point u of krP is the best total weight over all ways of writing
u as a sum of k points of rP.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache, reduce
from typing import Mapping, Sequence

from .errors import (AlmostTrivial, FitUnstable, ValidationError, ZeroB0,
                     UnreachablePoint)
from .exact import (FitPolynomial, as_fraction, format_rational, interpolate,
                    laurent_coefficients, leading_coefficient)
from .linalg import rref

Point = tuple[int, ...]

DEFAULT_HOLDOUT = 2
DEFAULT_K_MAX = 64


class NormConvention(enum.Enum):
    L2_LIMIT = "l2"
    LEVEL_R = "level"


def _primitive_int(v: Sequence[Fraction]) -> tuple[int, ...]:
    den = reduce(math.lcm, (Fraction(x).denominator for x in v), 1)
    ints = [int(Fraction(x) * den) for x in v]
    g = reduce(math.gcd, ints, 0)
    return tuple(x // g for x in ints)


def _normal_through(points: Sequence[Point], n: int) -> tuple[int, ...] | None:
    """Integer normal of the affine hyperplane through n points, if unique."""
    p0 = points[0]
    diffs = [[Fraction(a - b) for a, b in zip(p, p0)] for p in points[1:]]
    red, piv = rref(diffs, n) if diffs else ([], [])
    if len(red) != n - 1:
        return None
    free = next(c for c in range(n) if c not in piv)
    normal = [Fraction(0)] * n
    normal[free] = Fraction(1)
    for row, c in zip(red, piv):
        normal[c] = -row[free]
    return _primitive_int(normal)


@dataclass(frozen=True)
class ToricPolarization:
    """A lattice polytope P, standing for (X, L) with H^0(X, L) = Q^{P cap Z^n}."""

    dim: int
    lattice_points: tuple[Point, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        pts = tuple(sorted(tuple(int(x) for x in p) for p in self.lattice_points))
        if len(set(pts)) != len(pts):
            raise ValidationError("lattice points must be distinct")
        if any(len(p) != self.dim for p in pts):
            raise ValidationError("lattice point of the wrong dimension")
        object.__setattr__(self, "lattice_points", pts)
        diffs = [[Fraction(a - b) for a, b in zip(p, pts[0])] for p in pts[1:]]
        if len(rref(diffs, self.dim)[0]) != self.dim:
            raise ValidationError("polytope is not full-dimensional")
        missing = set(self.dilate(1)) - set(pts)
        if missing:
            raise ValidationError(f"lattice points of P are missing: {sorted(missing)}")

    @cached_property
    def facets(self) -> tuple[tuple[tuple[int, ...], int], ...]:
        """Inequalities <a, x> <= b cutting out P."""
        out = set()
        for combo in itertools.combinations(self.lattice_points, self.dim):
            a = _normal_through(combo, self.dim)
            if a is None:
                continue
            vals = [sum(x * y for x, y in zip(a, p)) for p in self.lattice_points]
            b = sum(x * y for x, y in zip(a, combo[0]))
            if all(v <= b for v in vals):
                out.add((a, b))
            if all(v >= b for v in vals):
                out.add((tuple(-x for x in a), -b))
        return tuple(sorted(out))

    def dilate(self, k: int) -> tuple[Point, ...]:
        """Lattice points of kP in lexicographic order."""
        lo = [k * min(p[i] for p in self.lattice_points) for i in range(self.dim)]
        hi = [k * max(p[i] for p in self.lattice_points) for i in range(self.dim)]
        box = itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi)))
        return tuple(x for x in box
                     if all(sum(c * y for c, y in zip(a, x)) <= k * b for a, b in self.facets))

    def volume(self) -> Fraction:
        """Euclidean volume of P (dimensions 1 and 2)."""
        if self.dim == 1:
            xs = [p[0] for p in self.lattice_points]
            return Fraction(max(xs) - min(xs))
        if self.dim == 2:
            hull = _convex_hull_2d(self.lattice_points)
            area2 = sum(p[0] * q[1] - q[0] * p[1] for p, q in zip(hull, hull[1:] + hull[:1]))
            return Fraction(abs(area2), 2)
        raise NotImplementedError("volume only for dimensions 1 and 2")

    def is_normal(self, max_k: int = 3) -> bool:
        """Every lattice point of kP is a sum of k lattice points of P, k <= max_k."""
        level = set(self.lattice_points)
        for k in range(2, max_k + 1):
            level = {tuple(a + b for a, b in zip(u, p)) for u in level for p in self.lattice_points}
            if level != set(self.dilate(k)):
                return False
        return True

    def to_json(self) -> dict:
        return {"dim": self.dim, "lattice_points": [list(p) for p in self.lattice_points]}

    @classmethod
    def from_json(cls, obj) -> ToricPolarization:
        try:
            return cls(int(obj["dim"]), tuple(tuple(int(x) for x in p) for p in obj["lattice_points"]))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"bad polytope: {exc}") from exc


def _convex_hull_2d(points):
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def projective_line(degree: int = 1) -> ToricPolarization:
    return ToricPolarization(1, tuple((a,) for a in range(degree + 1)), name=f"P1_O{degree}")


def projective_plane() -> ToricPolarization:
    return ToricPolarization(2, ((0, 0), (1, 0), (0, 1)), name="P2_O1")


def p1_times_p1() -> ToricPolarization:
    return ToricPolarization(2, ((0, 0), (1, 0), (0, 1), (1, 1)), name="P1xP1_O11")


SHIPPED = {
    "P1_O1": projective_line(1),
    "P1_O2": projective_line(2),
    "P2_O1": projective_plane(),
    "P1xP1_O11": p1_times_p1(),
}


@lru_cache(maxsize=None)
def sections(X: ToricPolarization, k: int) -> tuple[Point, ...]:
    """Monomial basis of H^0(X, kL): the lattice points of kP."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return X.dilate(k)


@dataclass(frozen=True)
class MonomialConfig:
    """Trace-zero weights on the lattice points of rP."""

    exponent: int
    weights: tuple[tuple[Point, Fraction], ...]

    def __post_init__(self):
        items = tuple(sorted((tuple(int(x) for x in p), as_fraction(w)) for p, w in self.weights))
        object.__setattr__(self, "weights", items)
        if self.exponent < 1:
            raise ValidationError("exponent must be >= 1")
        if len({p for p, _ in items}) != len(items):
            raise ValidationError("repeated lattice point in configuration")
        if sum(w for _, w in items) != 0:
            raise ValidationError("configuration weights must sum to zero")

    @classmethod
    def from_mapping(cls, exponent: int, mapping: Mapping, center: bool = False) -> MonomialConfig:
        items = [(tuple(p) if not isinstance(p, int) else (p,), as_fraction(w)) for p, w in mapping.items()]
        if center:
            mean = sum(w for _, w in items) / len(items)
            items = [(p, w - mean) for p, w in items]
        return cls(exponent, tuple(items))

    @property
    def points(self) -> tuple[Point, ...]:
        return tuple(p for p, _ in self.weights)

    def as_dict(self) -> dict[Point, Fraction]:
        return dict(self.weights)

    def scaled(self, c) -> MonomialConfig:
        c = as_fraction(c)
        return MonomialConfig(self.exponent, tuple((p, w * c) for p, w in self.weights))

    def is_zero(self) -> bool:
        return all(w == 0 for _, w in self.weights)

    def check_against(self, X: ToricPolarization) -> None:
        if set(self.points) != set(sections(X, self.exponent)):
            raise ValidationError("configuration points are not the lattice points of rP")

    def to_json(self) -> dict:
        return {"exponent": self.exponent,
                "weights": [{"point": list(p), "w": format_rational(w)} for p, w in self.weights]}

    @classmethod
    def from_json(cls, obj) -> MonomialConfig:
        try:
            return cls(int(obj["exponent"]),
                       tuple((tuple(int(x) for x in e["point"]), as_fraction(e["w"])) for e in obj["weights"]))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"bad configuration: {exc}") from exc


# -- induced weights ----------------------------------------------------------


_TABLES: dict[tuple, dict[int, dict[Point, Fraction]]] = {}
_TABLE_KEYS_MAX = 512


def _induced_table(weights: tuple[tuple[Point, Fraction], ...], k: int) -> dict[Point, Fraction]:
    # Maximum over partial Minkowski sums, extended one point at a time from
    # the nearest level already computed for these weights.
    cache = _TABLES.get(weights)
    if cache is None:
        if len(_TABLES) >= _TABLE_KEYS_MAX:
            _TABLES.clear()
        cache = _TABLES[weights] = {1: dict(weights)}
    if k in cache:
        return cache[k]
    start = max(j for j in cache if j < k)
    table = cache[start]
    for _ in range(k - start):
        out: dict[Point, Fraction] = {}
        for u, a in table.items():
            for p, w in weights:
                s = tuple(x + y for x, y in zip(u, p))
                v = a + w
                if s not in out or v > out[s]:
                    out[s] = v
        table = out
    cache[k] = table
    return table


def induced_weights(c: MonomialConfig, k: int) -> dict[Point, Fraction]:
    """Weights of c on every reachable lattice point of k(rP)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return dict(_induced_table(c.weights, k))


def induced_weight(c: MonomialConfig, k: int, u: Sequence[int]) -> Fraction:
    u = tuple(u)
    table = _induced_table(c.weights, k)
    if u not in table:
        raise UnreachablePoint(f"{u} is not a sum of {k} points of rP")
    return table[u]


def brute_force_induced_weight(c: MonomialConfig, k: int, u: Sequence[int]) -> Fraction | None:
    """Maximum over all k-element multisets of rP summing to u (oracle)."""
    u = tuple(u)
    best = None
    for combo in itertools.combinations_with_replacement(c.weights, k):
        s = tuple(sum(p[i] for p, _ in combo) for i in range(len(u)))
        if s == u:
            w = sum(w for _, w in combo)
            if best is None or w > best:
                best = w
    return best


def raise_bundle(c: MonomialConfig, k: int) -> MonomialConfig:
    """The configuration of (X, kL) at exponent rk, recentred but not rescaled."""
    table = induced_weights(c, k)
    mean = sum(table.values()) / len(table)
    return MonomialConfig(c.exponent * k, tuple((p, w - mean) for p, w in table.items()))


def level_weights(c: MonomialConfig, X: ToricPolarization, level: int) -> list[Fraction]:
    """Induced weights on sections(X, level), in lattice order; level must be a multiple of r."""
    if level % c.exponent:
        raise ValueError(f"level {level} is not a multiple of exponent {c.exponent}")
    table = _induced_table(c.weights, level // c.exponent)
    out = []
    for u in sections(X, level):
        if u not in table:
            raise UnreachablePoint(f"{u} is not reachable; is P normal?")
        out.append(table[u])
    return out


@dataclass(frozen=True)
class LevelSums:
    level: int
    h: int
    total_a: Fraction
    total_b: Fraction
    aa: Fraction
    bb: Fraction
    ab: Fraction

    def traceless(self) -> tuple[Fraction, Fraction, Fraction]:
        """(Tr(AB), Tr(A^2), Tr(B^2)) for the traceless parts."""
        h = self.h
        return (self.ab - self.total_a * self.total_b / h,
                self.aa - self.total_a ** 2 / h,
                self.bb - self.total_b ** 2 / h)


def level_sums(a: MonomialConfig, b: MonomialConfig, X: ToricPolarization, level: int) -> LevelSums:
    wa = level_weights(a, X, level)
    wb = wa if b is a else level_weights(b, X, level)
    return LevelSums(
        level, len(wa), sum(wa, Fraction(0)), sum(wb, Fraction(0)),
        sum((x * x for x in wa), Fraction(0)), sum((y * y for y in wb), Fraction(0)),
        sum((x * y for x, y in zip(wa, wb)), Fraction(0)),
    )


def fit_sequence(values: Sequence[tuple[int, Fraction]], degree: int, holdout: int) -> FitPolynomial:
    return interpolate(values[:degree + 1], degree, values[degree + 1:degree + 1 + holdout])


@dataclass(frozen=True)
class PairFits:
    """Verified fits in the level multiplier k, where the level is k * base."""

    base: int
    h: FitPolynomial
    total_a: FitPolynomial
    total_b: FitPolynomial
    aa: FitPolynomial
    bb: FitPolynomial
    ab: FitPolynomial
    n: int
    granularity: int = 1

    @property
    def verified(self) -> bool:
        return all(p.verified for p in (self.h, self.total_a, self.total_b, self.aa, self.bb, self.ab))

    def traceless_leading(self) -> tuple[Fraction, Fraction, Fraction]:
        """Leading coefficients (k^{n+2}) of Tr(AB), Tr(A^2), Tr(B^2), traceless parts."""
        n = self.n
        a0 = leading_coefficient(self.h, n)
        ba = leading_coefficient(self.total_a, n + 1)
        bb = leading_coefficient(self.total_b, n + 1)
        return (leading_coefficient(self.ab, n + 2) - ba * bb / a0,
                leading_coefficient(self.aa, n + 2) - ba * ba / a0,
                leading_coefficient(self.bb, n + 2) - bb * bb / a0)


def granularities(limit: int):
    """1, 2, 6, 12, 60, ...: lcm(1..i), so every period eventually divides one."""
    g, i = 1, 1
    while g <= limit:
        yield g
        i += 1
        nxt = math.lcm(g, i)
        while nxt == g:
            i += 1
            nxt = math.lcm(g, i)
        g = nxt


def pair_fits(a: MonomialConfig, b: MonomialConfig, X: ToricPolarization, base: int,
              holdout: int = DEFAULT_HOLDOUT, k_max: int = DEFAULT_K_MAX) -> PairFits:
    """Fit h, the weight totals and the three trace pairings at levels j*g*base.

    The granularity g runs through lcm(1..i) until every fit verifies on its
    holdout levels, since the sums are only polynomial along multiples of
    their period.
    """
    if holdout < 1:
        raise ValueError("holdout must be >= 1")
    n = X.dim
    count = n + 3 + holdout
    for g in granularities(k_max // count):
        rows = [level_sums(a, b, X, j * g * base) for j in range(1, count + 1)]
        ks = [j * g for j in range(1, count + 1)]

        def fit(attr, deg):
            return fit_sequence([(k, Fraction(getattr(r, attr))) for k, r in zip(ks, rows)], deg, holdout)

        fits = PairFits(base, fit("h", n), fit("total_a", n + 1), fit("total_b", n + 1),
                        fit("aa", n + 2), fit("bb", n + 2), fit("ab", n + 2), n, g)
        if fits.verified:
            return fits
    raise FitUnstable(f"no verified fit with level multipliers up to {k_max}")


# -- invariants ---------------------------------------------------------------


@dataclass(frozen=True)
class WeightPolynomials:
    h_poly: FitPolynomial
    w_poly: FitPolynomial
    tr2_poly: FitPolynomial
    exponent: int
    n: int


def weight_polynomials(c: MonomialConfig, X: ToricPolarization, holdout: int = DEFAULT_HOLDOUT,
                       k_max: int = DEFAULT_K_MAX) -> WeightPolynomials:
    """h(k) = #sections at level kr, w(k) = total weight, tr2(k) = sum of squares."""
    fits = pair_fits(c, c, X, c.exponent, holdout, k_max)
    return WeightPolynomials(fits.h, fits.total_a, fits.aa, c.exponent, X.dim)


def cross_trace(a: MonomialConfig, b: MonomialConfig, X: ToricPolarization, level: int) -> Fraction:
    return level_sums(a, b, X, level).ab


def _coerce_config(c):
    # ConfigPoint instances convert themselves; TrivialFlag points become None
    to_config = getattr(c, "to_config", None)
    return to_config() if to_config else c


def l2_norm_sq(c: MonomialConfig, X: ToricPolarization, polys: WeightPolynomials | None = None,
               **fit_kw) -> Fraction:
    """lim (kr)^{-n-2} Tr(traceless T_k^2) = (c2 - b0^2/a0) / r^{n+2}."""
    c = _coerce_config(c)
    if c is None or c.is_zero():
        return Fraction(0)
    polys = polys or weight_polynomials(c, X, **fit_kw)
    n = X.dim
    a0 = leading_coefficient(polys.h_poly, n)
    b0 = leading_coefficient(polys.w_poly, n + 1)
    c2 = leading_coefficient(polys.tr2_poly, n + 2)
    return (c2 - b0 * b0 / a0) / Fraction(c.exponent) ** (n + 2)


def is_almost_trivial(c, X: ToricPolarization, **fit_kw) -> bool:
    return l2_norm_sq(c, X, **fit_kw) == 0


def level_norm(c: MonomialConfig, X: ToricPolarization) -> Fraction:
    """r^{-n-2} Tr_{V_r} A^2 for the generator itself."""
    return sum((w * w for _, w in c.weights), Fraction(0)) / Fraction(c.exponent) ** (X.dim + 2)


def _norm_for(c, X, convention: NormConvention, polys) -> Fraction:
    if NormConvention(convention) is NormConvention.LEVEL_R:
        return level_norm(c, X)
    return l2_norm_sq(c, X, polys)


def chow_paper(c: MonomialConfig, X: ToricPolarization, k: int,
               norm_convention: NormConvention = NormConvention.LEVEL_R,
               polys: WeightPolynomials | None = None, **fit_kw) -> Fraction:
    """||lambda||^{-1} (k r a0 / b0 - w(k) / h(k)), evaluated literally."""
    if k < 1:
        raise ValueError("k must be >= 1")
    polys = polys or weight_polynomials(c, X, **fit_kw)
    n = X.dim
    a0 = leading_coefficient(polys.h_poly, n)
    b0 = leading_coefficient(polys.w_poly, n + 1)
    if b0 == 0:
        raise ZeroB0("b0 = 0: the literal Chow weight formula is undefined")
    norm = _norm_for(c, X, norm_convention, polys)
    if norm == 0:
        raise AlmostTrivial("zero norm")
    r = c.exponent
    total = level_sums(c, c, X, k * r)
    return (k * r * a0 / b0 - total.total_a / total.h) / norm


def futaki_expansion(polys: WeightPolynomials) -> tuple[Fraction, Fraction]:
    """(F0, F1) with w(k) / (k h(k)) = F0 + F1/k + O(k^-2)."""
    den = (Fraction(0),) + tuple(polys.h_poly.coefficients)
    coeffs = laurent_coefficients(polys.w_poly.coefficients, den, -1)
    return coeffs.get(0, Fraction(0)), coeffs.get(-1, Fraction(0))


def df_classical(c: MonomialConfig, X: ToricPolarization,
                 norm_convention: NormConvention = NormConvention.L2_LIMIT,
                 polys: WeightPolynomials | None = None, **fit_kw) -> tuple[Fraction, float]:
    """(df_raw, df_normalized) with df_raw = -F1."""
    c = _coerce_config(c)
    if c is None:
        raise AlmostTrivial("trivial point")
    polys = polys or weight_polynomials(c, X, **fit_kw)
    if l2_norm_sq(c, X, polys) == 0:
        raise AlmostTrivial("almost trivial configuration has no normalized DF")
    df_raw = -futaki_expansion(polys)[1]
    norm = _norm_for(c, X, norm_convention, polys)
    return df_raw, float(df_raw) / math.sqrt(norm)


def df_normalized_signed_square(c: MonomialConfig, X: ToricPolarization,
                                norm_convention: NormConvention = NormConvention.L2_LIMIT,
                                **fit_kw) -> Fraction:
    """sign(df) * df^2 / norm: the exact surrogate of df_normalized."""
    c = _coerce_config(c)
    polys = weight_polynomials(c, X, **fit_kw)
    df_raw, _ = df_classical(c, X, norm_convention, polys)
    return df_raw * abs(df_raw) / _norm_for(c, X, norm_convention, polys)


@dataclass(frozen=True)
class InvariantReport:
    h_poly: FitPolynomial
    w_poly: FitPolynomial
    tr2_poly: FitPolynomial
    a0: Fraction
    a1: Fraction
    b0: Fraction
    b1: Fraction
    l2_norm_sq: Fraction
    df_classical: Fraction | None
    df_normalized: float | None
    chow_values: tuple[tuple[int, Fraction], ...]
    norm_convention: NormConvention
    notes: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "h_poly": [format_rational(x) for x in self.h_poly.coefficients],
            "w_poly": [format_rational(x) for x in self.w_poly.coefficients],
            "tr2_poly": [format_rational(x) for x in self.tr2_poly.coefficients],
            "a0": format_rational(self.a0), "a1": format_rational(self.a1),
            "b0": format_rational(self.b0), "b1": format_rational(self.b1),
            "l2_norm_sq": format_rational(self.l2_norm_sq),
            "df_raw": None if self.df_classical is None else format_rational(self.df_classical),
            "df_normalized": None if self.df_normalized is None else float(f"{self.df_normalized:.10g}"),
            "chow_values": [[k, format_rational(v)] for k, v in self.chow_values],
            "norm_convention": self.norm_convention.value,
            "verified": all(p.verified for p in (self.h_poly, self.w_poly, self.tr2_poly)),
            "notes": list(self.notes),
        }


def invariant_report(c: MonomialConfig, X: ToricPolarization, chow_levels: Sequence[int] = (1, 2, 3, 4),
                     norm_convention: NormConvention = NormConvention.L2_LIMIT, **fit_kw) -> InvariantReport:
    c.check_against(X)
    convention = NormConvention(norm_convention)
    polys = weight_polynomials(c, X, **fit_kw)
    n = X.dim
    a0, a1 = leading_coefficient(polys.h_poly, n), leading_coefficient(polys.h_poly, n - 1)
    b0, b1 = leading_coefficient(polys.w_poly, n + 1), leading_coefficient(polys.w_poly, n)
    norm = l2_norm_sq(c, X, polys)
    notes = []
    df_raw = df_norm = None
    if norm == 0:
        notes.append("AlmostTrivial")
    else:
        df_raw, df_norm = df_classical(c, X, convention, polys)
    chow = []
    try:
        chow = [(k, chow_paper(c, X, k, convention, polys)) for k in chow_levels]
    except ZeroB0:
        notes.append("ZeroB0")
    except AlmostTrivial:
        pass
    return InvariantReport(polys.h_poly, polys.w_poly, polys.tr2_poly, a0, a1, b0, b1, norm,
                           df_raw, df_norm, tuple(chow), convention, tuple(notes))
