"""Monomial filtrations of the section ring and their finitely generated approximants.

A filtration assigns a weight to every lattice point u of every dilate kP.
Admissibility on monomial data means superadditivity of that weight and a
linear lower bound. The m-th approximant keeps only the level-m weights and
generates the rest by the best-decomposition rule, which is exactly how a
``MonomialConfig`` of exponent m induces weights at levels km.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .direct_system import ConfigPoint, DistanceResult, d_infinity
from .errors import ValidationError, ZeroNorm
from .exact import QuadExt, as_fraction, floor_quad, format_rational
from .flags import TrivialFlag
from .testbed import (DEFAULT_HOLDOUT, DEFAULT_K_MAX, MonomialConfig, Point,
                      ToricPolarization, l2_norm_sq, level_weights, sections)


class FiltrationKind(enum.Enum):
    LINEAR_RATIONAL = "linear_rational"
    FLOOR_QUAD = "floor_quad"
    TABLE = "table"


@dataclass(frozen=True)
class FiltrationSpec:
    kind: FiltrationKind
    covector: tuple[Fraction, ...] = ()
    alpha: QuadExt | None = None
    direction: tuple[int, ...] = ()
    table: Mapping[int, Mapping[Point, Fraction]] = field(default_factory=dict, compare=False, hash=False)
    left_bound: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "kind", FiltrationKind(self.kind))
        if self.kind is FiltrationKind.LINEAR_RATIONAL and not self.covector:
            raise ValidationError("linear_rational filtration needs a covector")
        if self.kind is FiltrationKind.FLOOR_QUAD and (self.alpha is None or not self.direction):
            raise ValidationError("floor_quad filtration needs alpha and direction")
        if self.kind is FiltrationKind.TABLE and not self.table:
            raise ValidationError("table filtration needs at least one level")

    @classmethod
    def linear(cls, covector: Sequence) -> FiltrationSpec:
        cov = tuple(as_fraction(x) for x in covector)
        return cls(FiltrationKind.LINEAR_RATIONAL, covector=cov)

    @classmethod
    def floor_quad(cls, alpha: QuadExt, direction: Sequence[int]) -> FiltrationSpec:
        return cls(FiltrationKind.FLOOR_QUAD, alpha=alpha, direction=tuple(int(x) for x in direction))

    @classmethod
    def from_table(cls, levels: Mapping[int, Mapping], left_bound=0) -> FiltrationSpec:
        table = {int(k): {(p,) if isinstance(p, int) else tuple(p): as_fraction(w) for p, w in v.items()}
                 for k, v in levels.items()}
        return cls(FiltrationKind.TABLE, table=table, left_bound=as_fraction(left_bound))

    @property
    def max_level(self) -> int | None:
        return max(self.table) if self.kind is FiltrationKind.TABLE else None

    def weight(self, u: Sequence[int], k: int):
        """Weight of the monomial u of level k."""
        if self.kind is FiltrationKind.LINEAR_RATIONAL:
            return sum((c * x for c, x in zip(self.covector, u)), Fraction(0))
        if self.kind is FiltrationKind.FLOOR_QUAD:
            t = sum(e * x for e, x in zip(self.direction, u))
            return Fraction(floor_quad(self.alpha * t))
        try:
            return self.table[k][tuple(u)]
        except KeyError:
            raise ValidationError(f"table filtration has no weight for {tuple(u)} at level {k}") from None

    def to_json(self) -> dict:
        if self.kind is FiltrationKind.LINEAR_RATIONAL:
            return {"kind": self.kind.value, "covector": [format_rational(c) for c in self.covector]}
        if self.kind is FiltrationKind.FLOOR_QUAD:
            return {"kind": self.kind.value, "alpha": self.alpha.to_json(), "direction": list(self.direction)}
        return {"kind": self.kind.value, "left_bound": format_rational(self.left_bound),
                "levels": {str(k): [{"point": list(p), "w": format_rational(w)} for p, w in sorted(v.items())]
                           for k, v in sorted(self.table.items())}}

    @classmethod
    def from_json(cls, obj) -> FiltrationSpec:
        try:
            kind = FiltrationKind(obj["kind"])
            if kind is FiltrationKind.LINEAR_RATIONAL:
                return cls.linear(obj["covector"])
            if kind is FiltrationKind.FLOOR_QUAD:
                return cls.floor_quad(QuadExt.from_json(obj["alpha"]), obj["direction"])
            levels = {int(k): {tuple(e["point"]): e["w"] for e in v} for k, v in obj["levels"].items()}
            return cls.from_table(levels, obj.get("left_bound", 0))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"bad filtration: {exc}") from exc


def level_values(F: FiltrationSpec, X: ToricPolarization, m: int) -> list[tuple[Point, Fraction]]:
    return [(u, F.weight(u, m)) for u in sections(X, m)]


def multiplicativity_violations(F: FiltrationSpec, X: ToricPolarization, max_level: int):
    """Pairs (u, k), (u', k') with weight(u+u') < weight(u) + weight(u')."""
    bad = []
    for k in range(1, max_level):
        for k2 in range(1, max_level - k + 1):
            if k2 < k:
                continue
            for u, u2 in itertools.product(sections(X, k), sections(X, k2)):
                s = tuple(a + b for a, b in zip(u, u2))
                if F.weight(s, k + k2) < F.weight(u, k) + F.weight(u2, k2):
                    bad.append(((u, k), (u2, k2)))
    return bad


def left_bound_holds(F: FiltrationSpec, X: ToricPolarization, max_level: int, C=None) -> bool:
    """weight(u, k) >= C k at every level up to max_level."""
    C = F.left_bound if C is None else as_fraction(C)
    return all(F.weight(u, k) >= C * k for k in range(1, max_level + 1) for u in sections(X, k))


def approximant_config(F: FiltrationSpec, m: int, X: ToricPolarization) -> MonomialConfig:
    """Level-m weights of F recentred to trace zero, at their natural scale."""
    if m < 1:
        raise ValueError("m must be >= 1")
    vals = level_values(F, X, m)
    mean = sum(w for _, w in vals) / len(vals)
    return MonomialConfig(m, tuple((u, w - mean) for u, w in vals))


def approximant(F: FiltrationSpec, m: int, X: ToricPolarization) -> ConfigPoint:
    """The point p_m of the level-m building, in canonical form."""
    c = approximant_config(F, m, X)
    if c.is_zero():
        return ConfigPoint(m, c.points, TrivialFlag(len(c.points)))
    return ConfigPoint.from_config(c)


@dataclass(frozen=True)
class ApproximantSequence:
    filtration: FiltrationSpec
    points: dict[int, ConfigPoint]
    norms: dict[int, Fraction]


def approximant_sequence(F: FiltrationSpec, X: ToricPolarization, ms: Sequence[int],
                         **fit_kw) -> ApproximantSequence:
    points, norms = {}, {}
    for m in ms:
        points[m] = approximant(F, m, X)
        norms[m] = l2_norm_sq(approximant_config(F, m, X), X, **fit_kw)
    return ApproximantSequence(F, points, norms)


def filtration_l2(F: FiltrationSpec, X: ToricPolarization, m_max: int,
                  **fit_kw) -> tuple[list[tuple[int, Fraction]], float]:
    """Squared L2 norms of p_1..p_{m_max} and the last norm as the estimate."""
    if m_max < 2:
        raise ValueError("m_max must be >= 2")
    seq = approximant_sequence(F, X, range(1, m_max + 1), **fit_kw)
    table = sorted(seq.norms.items())
    return table, math.sqrt(table[-1][1])


@dataclass(frozen=True)
class CauchyRow:
    m: int
    distance: DistanceResult

    def tsv(self) -> str:
        d = self.distance
        return "\t".join([str(self.m), format_rational(d.dot), format_rational(d.nu * d.nv),
                          f"{d.radians:.10g}"])


def cauchy_table(F: FiltrationSpec, X: ToricPolarization, m_list: Sequence[int], j: int,
                 holdout: int = DEFAULT_HOLDOUT, k_max: int = DEFAULT_K_MAX) -> list[CauchyRow]:
    """d_infinity(p_m, p_{jm}) for each m."""
    if j < 1:
        raise ValueError("j must be >= 1")
    rows = []
    for m in m_list:
        a, b = approximant_config(F, m, X), approximant_config(F, j * m, X)
        if a.is_zero() or b.is_zero():
            raise ZeroNorm(f"approximant at m={m} or {j * m} is trivial")
        try:
            rows.append(CauchyRow(m, d_infinity(a, b, X, holdout, k_max)))
        except ZeroNorm as exc:
            raise ZeroNorm(f"zero L2 norm at m={m}: {exc}") from exc
    return rows


@dataclass(frozen=True)
class ChainRow:
    k: int
    aa: Fraction
    ab: Fraction
    bb: Fraction

    @property
    def holds(self) -> bool:
        return self.aa <= self.ab <= self.bb


def _centred(xs: list[Fraction]) -> list[Fraction]:
    mean = sum(xs) / len(xs)
    return [x - mean for x in xs]


def trace_chain_check(F: FiltrationSpec, X: ToricPolarization, m: int, j: int,
                      k_list: Sequence[int]) -> tuple[bool, list[ChainRow]]:
    """Check Tr(A_m^2) <= Tr(A_m A_jm) <= Tr(A_jm^2) at each level k.

    A_m and A_jm are the traceless weight operators of the two approximants
    on H^0(X, kL). Returns (all hold, per-level rows); failing rows are the
    witnesses.
    """
    a, b = approximant_config(F, m, X), approximant_config(F, j * m, X)
    rows = []
    for k in k_list:
        if k % (j * m):
            raise ValueError(f"level {k} is not divisible by {j * m}")
        wa = _centred(level_weights(a, X, k))
        wb = _centred(level_weights(b, X, k))
        rows.append(ChainRow(k, sum((x * x for x in wa), Fraction(0)),
                             sum((x * y for x, y in zip(wa, wb)), Fraction(0)),
                             sum((y * y for y in wb), Fraction(0))))
    return all(r.holds for r in rows), rows


def domination_violations(F: FiltrationSpec, X: ToricPolarization, m: int, j: int, k_list: Sequence[int]):
    """Points where the jm-approximant weight falls below the m-approximant weight.

    Uncentred weights: level-m values generate level-jm values that F itself
    can only improve on, so the jm-approximant dominates pointwise.
    """
    a = _raw_config(F, m, X)
    b = _raw_config(F, j * m, X)
    bad = []
    for k in k_list:
        for u, x, y in zip(sections(X, k), _raw_level(a, X, k), _raw_level(b, X, k)):
            if y < x:
                bad.append((k, u, x, y))
    return bad


def _raw_config(F, m, X):
    vals = level_values(F, X, m)
    return [(u, w) for u, w in vals], m


def _raw_level(cfg, X, k):
    # best decomposition of each level-k point into k/m level-m points, without recentring
    items, m = cfg
    mean = sum(w for _, w in items) / len(items)
    centred = MonomialConfig(m, tuple((u, w - mean) for u, w in items))
    parts = k // m
    return [w + parts * mean for w in level_weights(centred, X, k)]
