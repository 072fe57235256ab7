"""Exact row-echelon linear algebra over the rationals."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Sequence

Vector = tuple[Fraction, ...]


def vec(xs: Iterable) -> Vector:
    return tuple(x if isinstance(x, Fraction) else Fraction(x) for x in xs)


def primitive_ints(v: Sequence) -> list[int]:
    """Positive multiple of a rational vector with coprime integer entries."""
    v = [x if isinstance(x, Fraction) else Fraction(x) for x in v]
    den = reduce(lcm, (x.denominator for x in v), 1)
    ints = [x.numerator * (den // x.denominator) for x in v]
    g = reduce(gcd, ints, 0) or 1
    return [x // g for x in ints]


def rref(rows: Iterable[Sequence[Fraction]], ncols: int | None = None) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row-echelon form; returns (nonzero rows, pivot columns).

    Elimination runs fraction-free on primitive integer rows; only the final
    division by the pivots produces rationals. The RREF is unique, so this
    is purely a speed choice.
    """
    m = [primitive_ints(r) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0]) if ncols is None else ncols
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        row = m[r]
        p = row[c]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                new = [a * p - f * b for a, b in zip(m[i], row)]
                g = reduce(gcd, new, 0) or 1
                m[i] = [x // g for x in new]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    out = []
    for row, c in zip(m[:r], pivots):
        p = row[c]
        out.append([Fraction(x, p) if x else Fraction(0) for x in row])
    return out, pivots


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    return len(rref(rows)[0]) if rows else 0


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def inverse(matrix: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    n = len(matrix)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(matrix)]
    red, piv = rref(aug, n)
    if piv != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in red]


def row_times(v: Sequence[Fraction], matrix: Sequence[Sequence[Fraction]]) -> Vector:
    """Row vector times matrix."""
    ncols = len(matrix[0])
    out = [Fraction(0)] * ncols
    for a, row in zip(v, matrix):
        if a != 0:
            for j in range(ncols):
                out[j] += a * row[j]
    return tuple(out)


@dataclass(frozen=True)
class Subspace:
    """A subspace of Q^n stored by its canonical RREF basis."""

    ambient_dim: int
    rows: tuple[Vector, ...]

    @classmethod
    def span(cls, vectors: Iterable[Sequence], ambient_dim: int | None = None) -> Subspace:
        vs = [vec(v) for v in vectors]
        if ambient_dim is None:
            if not vs:
                raise ValueError("ambient_dim needed for an empty spanning set")
            ambient_dim = len(vs[0])
        if any(len(v) != ambient_dim for v in vs):
            raise ValueError("vectors do not match ambient dimension")
        red, _ = rref(vs, ambient_dim)
        return cls(ambient_dim, tuple(tuple(r) for r in red))

    @classmethod
    def full(cls, n: int) -> Subspace:
        return cls(n, tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)))

    @classmethod
    def zero(cls, n: int) -> Subspace:
        return cls(n, ())

    @property
    def dim(self) -> int:
        return len(self.rows)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(next(i for i, x in enumerate(r) if x != 0) for r in self.rows)

    def contains(self, v: Sequence) -> bool:
        v = list(vec(v))
        for row, c in zip(self.rows, self.pivots):
            if v[c] != 0:
                f = v[c]
                v = [a - f * b if b else a for a, b in zip(v, row)]
        return all(x == 0 for x in v)

    def contains_subspace(self, other: Subspace) -> bool:
        return all(self.contains(r) for r in other.rows)

    def __add__(self, other: Subspace) -> Subspace:
        return Subspace.span(self.rows + other.rows, self.ambient_dim)

    def intersect(self, other: Subspace) -> Subspace:
        """Zassenhaus: reduce [[s, s], [t, 0]]; rows (0 | v) span the meet."""
        n = self.ambient_dim
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(n)
        if self.contains_subspace(other):
            return other
        if other.contains_subspace(self):
            return self
        zero = (Fraction(0),) * n
        big = [r + r for r in self.rows] + [r + zero for r in other.rows]
        red, piv = rref(big, 2 * n)
        meet = [row[n:] for row, c in zip(red, piv) if c >= n]
        return Subspace.span(meet, n)

    def to_json(self) -> list:
        from .exact import format_rational
        return [[format_rational(x) for x in r] for r in self.rows]


class Echelon:
    """Incrementally grown echelon basis for cheap membership tests.

    Rows are kept as primitive integer vectors; membership does not care
    about scaling, and integer elimination is far cheaper than rational.
    """

    def __init__(self):
        self._rows: list[tuple[int, list[int]]] = []

    def __len__(self) -> int:
        return len(self._rows)

    def reduce(self, v: Sequence) -> list[int]:
        r = primitive_ints(v)
        for c, row in self._rows:
            if r[c]:
                f, p = r[c], row[c]
                r = [a * p - f * b for a, b in zip(r, row)]
                g = reduce(gcd, r, 0) or 1
                r = [x // g for x in r]
        return r

    def add(self, v: Sequence) -> bool:
        """Insert v; False if it was already in the span."""
        r = self.reduce(v)
        c = next((i for i, x in enumerate(r) if x), None)
        if c is None:
            return False
        self._rows.append((c, r))
        return True


def coordinates(v: Sequence[Fraction], basis: Sequence[Sequence[Fraction]]) -> Vector:
    """Coefficients c with sum c_i basis_i == v; raises if v is outside the span."""
    n = len(basis)
    cols = len(v)
    # solve c B = v through rref of the transposed augmented system
    aug = [[basis[i][j] for i in range(n)] + [v[j]] for j in range(cols)]
    red, piv = rref(aug, n + 1)
    if n in piv:
        raise ValueError("vector is not in the span of the basis")
    c = [Fraction(0)] * n
    for row, p in zip(red, piv):
        c[p] = row[n]
    return tuple(c)
