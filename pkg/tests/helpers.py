"""Random generators and independent oracles shared by the test modules."""

import random
from fractions import Fraction
from pathlib import Path

from tcspace.flags import ApartmentPoint, flag_from_weights
from tcspace.linalg import rank

FIXTURES = Path(__file__).parent / "fixtures"


def random_basis(rng: random.Random, n: int):
    while True:
        rows = [[Fraction(rng.randint(-2, 2)) for _ in range(n)] for _ in range(n)]
        if rank(rows) == n:
            return rows


def random_weights(rng: random.Random, n: int):
    while True:
        w = [Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(n)]
        mean = sum(w) / n
        w = [x - mean for x in w]
        if len(set(w)) > 1:
            return w


def random_flag(rng: random.Random, n: int, basis=None):
    basis = basis or random_basis(rng, n)
    return flag_from_weights(ApartmentPoint(basis, random_weights(rng, n)))
