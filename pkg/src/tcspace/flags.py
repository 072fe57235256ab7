"""Weighted flags, apartments and the Tits metric on one building."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Sequence, Union

from .errors import ValidationError, ZeroVector, ZeroWeightVector
from .exact import as_fraction, format_rational
from .linalg import Echelon, Subspace, Vector, primitive_ints, rank, vec


@dataclass(frozen=True)
class TrivialFlag:
    """The trivial point: a one-step flag, i.e. a constant weight."""

    ambient_dim: int

    is_trivial = True

    def to_json(self) -> dict:
        return {"ambient_dim": self.ambient_dim, "steps": []}


@dataclass(frozen=True)
class WeightedFlag:
    """0 < F_1 < ... < F_k = V with weights w_1 < ... < w_k, trace zero."""

    steps: tuple[tuple[Subspace, Fraction], ...]
    ambient_dim: int

    is_trivial = False

    def __post_init__(self):
        n = self.ambient_dim
        steps = tuple((s, as_fraction(w)) for s, w in self.steps)
        object.__setattr__(self, "steps", steps)
        if len(steps) < 2:
            raise ValidationError("a weighted flag needs at least two steps; use TrivialFlag")
        prev_dim, prev_w, prev = 0, None, None
        for s, w in steps:
            if s.ambient_dim != n:
                raise ValidationError("step lives in the wrong ambient space")
            if s.dim <= prev_dim:
                raise ValidationError("flag subspaces must strictly increase")
            if prev_w is not None and w <= prev_w:
                raise ValidationError("flag weights must strictly increase")
            if prev is not None and not s.contains_subspace(prev):
                raise ValidationError("flag subspaces must be nested")
            prev_dim, prev_w, prev = s.dim, w, s
        if prev_dim != n:
            raise ValidationError("last step of a flag must be the ambient space")
        if self.trace() != 0:
            raise ValidationError("flag weights must be trace-zero")

    @property
    def subspaces(self) -> tuple[Subspace, ...]:
        return tuple(s for s, _ in self.steps)

    @property
    def weights(self) -> tuple[Fraction, ...]:
        return tuple(w for _, w in self.steps)

    @property
    def multiplicities(self) -> tuple[int, ...]:
        dims = [s.dim for s in self.subspaces]
        return tuple(d - p for d, p in zip(dims, [0] + dims[:-1]))

    def trace(self) -> Fraction:
        return sum((m * w for m, w in zip(self.multiplicities, self.weights)), Fraction(0))

    def to_json(self) -> dict:
        return {
            "ambient_dim": self.ambient_dim,
            "steps": [{"basis": s.to_json(), "weight": format_rational(w)} for s, w in self.steps],
        }


Flag = Union[WeightedFlag, TrivialFlag]


@dataclass(frozen=True)
class ApartmentPoint:
    """A basis of V together with one trace-zero weight per basis vector."""

    basis: tuple[Vector, ...]
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        basis = tuple(vec(b) for b in self.basis)
        weights = tuple(as_fraction(w) for w in self.weights)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "weights", weights)
        if len(basis) != len(weights):
            raise ValidationError("one weight per basis vector")
        if any(len(b) != len(basis) for b in basis) or rank(basis) != len(basis):
            raise ValidationError("apartment basis is not a basis of the ambient space")
        if sum(weights) != 0:
            raise ValidationError("apartment weights must sum to zero")

    @classmethod
    def standard(cls, weights: Sequence) -> ApartmentPoint:
        n = len(weights)
        basis = tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))
        return cls(basis, tuple(as_fraction(w) for w in weights))

    @property
    def ambient_dim(self) -> int:
        return len(self.basis)

    def to_json(self) -> dict:
        return {
            "basis": [[format_rational(x) for x in b] for b in self.basis],
            "weights": [format_rational(w) for w in self.weights],
        }


def flag_from_weights(point: ApartmentPoint) -> Flag:
    """Group basis vectors by weight; F_i is spanned by those of weight <= w_i."""
    n = point.ambient_dim
    levels = sorted(set(point.weights))
    if len(levels) == 1:
        return TrivialFlag(n)
    steps = []
    for w in levels:
        span = [b for b, x in zip(point.basis, point.weights) if x <= w]
        steps.append((Subspace.span(span, n), w))
    return WeightedFlag(tuple(steps), n)


def weight_of_vector(f: WeightedFlag, v: Sequence) -> Fraction:
    """Weight w_i of the first step F_i containing v."""
    v = vec(v)
    if all(x == 0 for x in v):
        raise ZeroVector("the zero vector has no weight")
    for s, w in f.steps:
        if s.contains(v):
            return w
    raise AssertionError("the last step of a flag is the whole space")


def is_equivalent(f: Flag, g: Flag) -> bool:
    if f.ambient_dim != g.ambient_dim:
        raise ValidationError("flags live in different ambient spaces")
    if f.is_trivial or g.is_trivial:
        return f.is_trivial and g.is_trivial
    if f.subspaces != g.subspaces:
        return False
    wf, wg = f.weights, g.weights
    # both start negative, so a common ratio is automatically positive
    return all(a * wg[0] == b * wf[0] for a, b in zip(wf, wg))


def _primitive(weights: Sequence[Fraction]) -> tuple[Fraction, ...]:
    den = reduce(lcm, (w.denominator for w in weights), 1)
    nums = [int(w * den) for w in weights]
    g = reduce(gcd, nums, 0)
    return tuple(Fraction(x // g) for x in nums)


def canonical_form(f: Flag) -> Flag:
    """Representative with coprime integer weights."""
    if f.is_trivial:
        return f
    return WeightedFlag(tuple(zip(f.subspaces, _primitive(f.weights))), f.ambient_dim)


def scale(f: WeightedFlag, c) -> WeightedFlag:
    c = as_fraction(c)
    if c <= 0:
        raise ValidationError("scaling constant must be positive")
    return WeightedFlag(tuple((s, w * c) for s, w in f.steps), f.ambient_dim)


def _adapted_basis(f: WeightedFlag) -> tuple[list[Vector], list[int]]:
    """Basis extending F_1 through F_k in turn, plus the step index of each vector."""
    basis: list[Vector] = []
    level: list[int] = []
    cur = Echelon()
    for i, s in enumerate(f.subspaces):
        for r in s.rows:
            if cur.add(r):
                basis.append(r)
                level.append(i)
    return basis, level


def _last_nonzero(c: Sequence[int]) -> int:
    for i in range(len(c) - 1, -1, -1):
        if c[i]:
            return i
    return -1


def _solve_integer(rows: list[list[int]], targets: list[list[int]]) -> list[list[int]]:
    """For each target t, integers c (up to a positive scalar) with sum c_i rows_i = t.

    Fraction-free Gauss-Jordan on the transposed system keeps everything in
    Python integers, which is much faster than rational arithmetic here.
    """
    n = len(rows)
    m = [[rows[i][j] for i in range(n)] + [t[j] for t in targets] for j in range(n)]
    for c in range(n):
        piv = next(i for i in range(c, n) if m[i][c])
        m[c], m[piv] = m[piv], m[c]
        if m[c][c] < 0:
            m[c] = [-x for x in m[c]]
        p = m[c][c]
        for i in range(n):
            if i != c and m[i][c]:
                f = m[i][c]
                row = [p * a - f * b for a, b in zip(m[i], m[c])]
                g = reduce(gcd, row, 0) or 1
                m[i] = [x // g for x in row]
    scale = reduce(lcm, (m[i][i] for i in range(n)), 1)
    return [[m[i][n + t] * (scale // m[i][i]) for i in range(n)] for t in range(len(targets))]


def common_apartment(f: WeightedFlag, g: WeightedFlag):
    """A basis adapted to both flags, with each flag's weight on each vector.

    Vectors of a g-adapted basis are written in f-adapted coordinates and
    reduced, in g order, until their last nonzero coordinates are distinct.
    Then every F_i meet G_j is spanned by the vectors it contains, so the
    result is adapted to both flags. Vectors come out sorted by that pivot,
    scaled to primitive integer vectors.
    """
    if f.ambient_dim != g.ambient_dim:
        raise ValidationError("flags live in different ambient spaces")
    if f.is_trivial or g.is_trivial:
        raise ValidationError("common_apartment needs nontrivial flags")
    fb, flevel = _adapted_basis(f)
    gb, glevel = _adapted_basis(g)
    fb = [primitive_ints(v) for v in fb]
    coords = _solve_integer(fb, [primitive_ints(v) for v in gb])
    owners: dict[int, list[int]] = {}
    owner_level: dict[int, int] = {}
    for c, lev in zip(coords, glevel):
        p = _last_nonzero(c)
        while p in owners:
            o = owners[p]
            c = [a * o[p] - c[p] * b for a, b in zip(c, o)]
            p = _last_nonzero(c)
        if p < 0:
            raise AssertionError("g-adapted basis was not independent")
        owners[p] = c
        owner_level[p] = lev
    n = f.ambient_dim
    basis, wf, wg = [], [], []
    for p in sorted(owners):
        c = owners[p]
        v = [sum(c[i] * fb[i][j] for i in range(n) if c[i]) for j in range(n)]
        basis.append(tuple(Fraction(x) for x in primitive_ints(v)))
        wf.append(f.weights[flevel[p]])
        wg.append(g.weights[owner_level[p]])
    return tuple(basis), tuple(wf), tuple(wg)


def is_adapted(basis: Sequence[Sequence], f: Flag) -> bool:
    basis = [vec(b) for b in basis]
    if f.is_trivial:
        return True
    for s in f.subspaces:
        inside = [b for b in basis if s.contains(b)]
        if len(inside) != s.dim or rank(inside) != s.dim:
            return False
    return True


def _weights_of(p) -> tuple[Fraction, ...]:
    if isinstance(p, ApartmentPoint):
        return p.weights
    return tuple(as_fraction(x) for x in p)


def tits_cosine(p, q) -> tuple[Fraction, Fraction, Fraction]:
    """Exact (<u,v>, <u,u>, <v,v>) for two weight vectors on a shared basis."""
    if isinstance(p, ApartmentPoint) and isinstance(q, ApartmentPoint) and p.basis != q.basis:
        raise ValidationError("tits_cosine needs points on the same basis")
    u, v = _weights_of(p), _weights_of(q)
    if len(u) != len(v):
        raise ValidationError("weight vectors differ in length")
    nu = sum((a * a for a in u), Fraction(0))
    nv = sum((b * b for b in v), Fraction(0))
    if nu == 0 or nv == 0:
        raise ZeroWeightVector("zero weight vector has no direction")
    return sum((a * b for a, b in zip(u, v)), Fraction(0)), nu, nv


def angle(dot: Fraction, nu: Fraction, nv: Fraction) -> float:
    """arccos(dot / sqrt(nu nv)); exact at the endpoints."""
    if dot * dot == nu * nv:
        return 0.0 if dot > 0 else math.pi
    c = float(dot) / math.sqrt(float(nu) * float(nv))
    return math.acos(max(-1.0, min(1.0, c)))


def tits_triple(f: WeightedFlag, g: WeightedFlag) -> tuple[Fraction, Fraction, Fraction]:
    _, wf, wg = common_apartment(f, g)
    return tits_cosine(wf, wg)


def tits_distance(f: WeightedFlag, g: WeightedFlag) -> float:
    return angle(*tits_triple(f, g))


def flag_from_json(obj) -> Flag:
    try:
        n = int(obj["ambient_dim"])
        raw = obj["steps"]
        if not raw:
            return TrivialFlag(n)
        steps = tuple(
            (Subspace.span([[as_fraction(x) for x in row] for row in st["basis"]], n), as_fraction(st["weight"]))
            for st in raw
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad flag: {exc}") from exc
    return WeightedFlag(steps, n)


def apartment_from_json(obj) -> ApartmentPoint:
    try:
        return ApartmentPoint(
            tuple(tuple(as_fraction(x) for x in b) for b in obj["basis"]),
            tuple(as_fraction(w) for w in obj["weights"]),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad apartment point: {exc}") from exc
