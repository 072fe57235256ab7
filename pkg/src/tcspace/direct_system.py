"""Maps between buildings and the limit pseudo-metric.

``iota(p, k)`` sends a point of the level-r building to the level-rk one. It
is computed literally: take the Segre image on Sym^k V_r, then retract onto
the copy of the level-rk section space sitting inside Sym^k V_r. The toric
testbed computes the same thing combinatorially (``raise_bundle``); the two
routes are checked against each other in the tests.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .errors import AlmostTrivialImage, ValidationError, ZeroNorm
from .exact import format_rational
from .flags import (ApartmentPoint, Flag, TrivialFlag, WeightedFlag, angle,
                    canonical_form, flag_from_weights, is_adapted, weight_of_vector)
from .linalg import Subspace, coordinates, vec
from .testbed import (DEFAULT_HOLDOUT, DEFAULT_K_MAX, MonomialConfig, PairFits, Point,
                      ToricPolarization, level_sums, pair_fits, sections)


def multi_indices(m: int, k: int) -> list[tuple[int, ...]]:
    """All (i_1..i_m) with sum k, in decreasing lexicographic order (v1^k first)."""
    out = []
    for bars in itertools.combinations(range(k + m - 1), m - 1):
        cuts = (-1,) + bars + (k + m - 1,)
        out.append(tuple(cuts[i + 1] - cuts[i] - 1 for i in range(m)))
    out.sort(reverse=True)
    return out


def _is_standard(basis) -> bool:
    return all(x == (1 if i == j else 0) for i, b in enumerate(basis) for j, x in enumerate(b))


def _monomial(basis: Sequence[Sequence[Fraction]], index: Sequence[int], position: dict) -> tuple[Fraction, ...]:
    """Coordinates of prod_j basis_j^{index_j} in the standard monomial basis of Sym^k."""
    m = len(basis)
    poly = {(0,) * m: Fraction(1)}
    for j, e in enumerate(index):
        for _ in range(e):
            nxt: dict = {}
            for expo, c in poly.items():
                for i, x in enumerate(basis[j]):
                    if x == 0:
                        continue
                    key = expo[:i] + (expo[i] + 1,) + expo[i + 1:]
                    nxt[key] = nxt.get(key, Fraction(0)) + c * x
            poly = nxt
    out = [Fraction(0)] * len(position)
    for expo, c in poly.items():
        out[position[expo]] += c
    return tuple(out)


def segre(point: ApartmentPoint, k: int) -> ApartmentPoint:
    """Monomials v^I with weight sum_j I_j w_j, recentred to trace zero."""
    if k < 1:
        raise ValueError("k must be >= 1")
    m = point.ambient_dim
    M = multi_indices(m, k)
    raw = [sum((i * w for i, w in zip(I, point.weights)), Fraction(0)) for I in M]
    mean = sum(raw) / len(raw)
    if _is_standard(point.basis):
        basis = tuple(tuple(Fraction(int(i == j)) for j in range(len(M))) for i in range(len(M)))
    else:
        position = {I: n for n, I in enumerate(M)}
        basis = tuple(_monomial(point.basis, I, position) for I in M)
    return ApartmentPoint(basis, tuple(w - mean for w in raw))


def retraction(f: Flag, W: Union[Subspace, Sequence[Sequence]]) -> Flag:
    """Restrict f to W: steps F_i meet W, with empty and repeated steps dropped.

    Coordinates on W are taken with respect to W's given basis (the RREF rows
    when W is a Subspace). The first occurrence of a repeated intersection
    keeps its weight; weights are then recentred to trace zero on W.
    """
    if isinstance(W, Subspace):
        wbasis = [tuple(r) for r in W.rows]
        wspace = W
    else:
        wbasis = [vec(v) for v in W]
        wspace = Subspace.span(wbasis, len(wbasis[0]))
        if wspace.dim != len(wbasis):
            raise ValidationError("W basis is not linearly independent")
    d = wspace.dim
    if d == 0:
        raise ValidationError("W must be nonzero")
    if f.is_trivial:
        return TrivialFlag(d)
    kept: list[tuple[Subspace, Fraction]] = []
    last_dim = 0
    for s, w in f.steps:
        meet = s.intersect(wspace)
        if meet.dim > last_dim:
            kept.append((meet, w))
            last_dim = meet.dim
        if last_dim == d:
            break
    if len(kept) < 2:
        return TrivialFlag(d)
    dims = [s.dim for s, _ in kept]
    mults = [a - b for a, b in zip(dims, [0] + dims[:-1])]
    mean = sum((m * w for m, (_, w) in zip(mults, kept)), Fraction(0)) / d
    steps = []
    for s, w in kept:
        local = Subspace.span([coordinates(r, wbasis) for r in s.rows], d)
        steps.append((local, w - mean))
    return WeightedFlag(tuple(steps), d)


@dataclass(frozen=True)
class ConfigPoint:
    """A point of the level-r building, coordinates labelled by lattice points of rP."""

    exponent: int
    points: tuple[Point, ...]
    flag: Flag

    def __post_init__(self):
        if self.flag.ambient_dim != len(self.points):
            raise ValidationError("flag dimension does not match the section count")

    @classmethod
    def from_config(cls, c: MonomialConfig) -> ConfigPoint:
        flag = flag_from_weights(ApartmentPoint.standard([w for _, w in c.weights]))
        return cls(c.exponent, c.points, canonical_form(flag))

    @property
    def is_trivial(self) -> bool:
        return self.flag.is_trivial

    def to_config(self) -> MonomialConfig | None:
        """Weights per lattice point; None for the trivial point."""
        if self.flag.is_trivial:
            return None
        n = len(self.points)
        basis = [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
        if not is_adapted(basis, self.flag):
            raise ValidationError("flag is not in the monomial apartment")
        return MonomialConfig(self.exponent,
                              tuple((p, weight_of_vector(self.flag, e)) for p, e in zip(self.points, basis)))

    def canonical(self) -> ConfigPoint:
        return ConfigPoint(self.exponent, self.points, canonical_form(self.flag))

    def to_json(self) -> dict:
        c = self.to_config()
        weights = [] if c is None else [{"point": list(p), "w": format_rational(w)} for p, w in c.weights]
        return {"exponent": self.exponent, "weights": weights}


def _as_config(p) -> MonomialConfig:
    if isinstance(p, MonomialConfig):
        return p
    c = p.to_config()
    if c is None:
        raise AlmostTrivialImage("trivial point")
    return c


def comultiplication_basis(X: ToricPolarization, r: int, k: int) -> tuple[list[tuple[Fraction, ...]], list]:
    """Vectors of Sym^k V_r spanning the level-rk section space, one per lattice point.

    Each level-rk point u maps to the sum of all degree-k monomials in level-r
    points adding up to u.
    """
    base = sections(X, r)
    M = multi_indices(len(base), k)
    targets = sections(X, r * k)
    slot = {u: i for i, u in enumerate(targets)}
    rows = [[Fraction(0)] * len(M) for _ in targets]
    for col, I in enumerate(M):
        u = tuple(sum(e * p[i] for e, p in zip(I, base)) for i in range(X.dim))
        rows[slot[u]][col] = Fraction(1)
    return [tuple(r_) for r_ in rows], list(targets)


def iota(p, k: int, X: ToricPolarization, canonical: bool = True) -> ConfigPoint:
    """(X, L) -> (X, kL): the retraction of the Segre image onto level-rk sections."""
    c = _as_config(p)
    c.check_against(X)
    if k == 1:
        point = ConfigPoint.from_config(c) if canonical else ConfigPoint(
            c.exponent, c.points, flag_from_weights(ApartmentPoint.standard([w for _, w in c.weights])))
        return point
    r = c.exponent
    weights = dict(c.weights)
    base = sections(X, r)
    image = segre(ApartmentPoint.standard([weights[u] for u in base]), k)
    W, targets = comultiplication_basis(X, r, k)
    rho = retraction(flag_from_weights(image), W)
    if rho.is_trivial:
        raise AlmostTrivialImage("the induced action on X is trivial")
    return ConfigPoint(r * k, tuple(targets), canonical_form(rho) if canonical else rho)


@dataclass(frozen=True)
class DistanceResult:
    dot: Fraction
    nu: Fraction
    nv: Fraction
    radians: float
    base: int

    @property
    def cos_squared_signed(self) -> Fraction:
        return self.dot * abs(self.dot) / (self.nu * self.nv)

    def to_json(self) -> dict:
        out = {"dot": format_rational(self.dot), "nu": format_rational(self.nu),
               "nv": format_rational(self.nv), "radians": float(f"{self.radians:.10g}")}
        cos = _exact_cosine(self.dot, self.nu, self.nv)
        if cos is not None:
            out["cos"] = format_rational(cos)
        return out


def _exact_cosine(dot: Fraction, nu: Fraction, nv: Fraction) -> Fraction | None:
    """dot / sqrt(nu nv) when that is rational."""
    prod = nu * nv
    rn, rd = math.isqrt(prod.numerator), math.isqrt(prod.denominator)
    if rn * rn != prod.numerator or rd * rd != prod.denominator:
        return None
    return dot / Fraction(rn, rd)


def d_infinity(p, q, X: ToricPolarization, holdout: int = DEFAULT_HOLDOUT,
               k_max: int = DEFAULT_K_MAX) -> DistanceResult:
    """Limit of the Tits distances between the images of p and q at common levels."""
    a, b = _as_config(p), _as_config(q)
    a.check_against(X)
    b.check_against(X)
    base = math.lcm(a.exponent, b.exponent)
    fits: PairFits = pair_fits(a, b, X, base, holdout, k_max)
    dot, nu, nv = fits.traceless_leading()
    if nu == 0 or nv == 0:
        raise ZeroNorm("a configuration has zero L2 norm")
    return DistanceResult(dot, nu, nv, angle(dot, nu, nv), base)


def finite_distance(p, q, X: ToricPolarization, level: int) -> DistanceResult:
    """Tits distance d_level between the images at one common level, summed directly."""
    a, b = _as_config(p), _as_config(q)
    dot, nu, nv = level_sums(a, b, X, level).traceless()
    if nu == 0 or nv == 0:
        raise ZeroNorm("a configuration is trivial at this level")
    return DistanceResult(dot, nu, nv, angle(dot, nu, nv), level)


def config_point_from_json(obj, X: ToricPolarization | None = None) -> ConfigPoint:
    c = MonomialConfig.from_json(obj)
    if X is not None:
        c.check_against(X)
    return ConfigPoint.from_config(c)
