import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tcspace.errors import AlmostTrivial, ValidationError, ZeroB0
from tcspace.exact import leading_coefficient
from tcspace.testbed import (SHIPPED, MonomialConfig, NormConvention, ToricPolarization,
                             brute_force_induced_weight, chow_paper, df_classical,
                             df_normalized_signed_square, induced_weight, invariant_report,
                             is_almost_trivial, l2_norm_sq, level_sums, pair_fits,
                             projective_line, projective_plane, raise_bundle, sections,
                             weight_polynomials)

P1 = projective_line(1)
P2 = projective_plane()
PRODUCT = MonomialConfig.from_mapping(1, {0: -1, 1: 1})
CONIC = MonomialConfig.from_mapping(2, {0: -2, 1: 1, 2: 1})


def random_config(rng, X, r):
    pts = sections(X, r)
    while True:
        w = [Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in pts]
        mean = sum(w) / len(w)
        w = [x - mean for x in w]
        if any(w):
            return MonomialConfig(r, tuple(zip(pts, w)))


def test_sections_examples():
    assert sections(P1, 3) == ((0,), (1,), (2,), (3,))
    assert len(sections(P2, 2)) == 6
    assert sections(projective_line(2), 3) == tuple((a,) for a in range(7))


def test_shipped_polytopes_are_normal():
    for X in SHIPPED.values():
        assert X.is_normal(4)


def test_polytope_validation():
    with pytest.raises(ValidationError):
        ToricPolarization(1, ((0,), (2,)))           # misses the lattice point 1
    with pytest.raises(ValidationError):
        ToricPolarization(2, ((0, 0), (1, 1)))       # not full-dimensional
    X = ToricPolarization.from_json({"dim": 2, "lattice_points": [[0, 0], [1, 0], [0, 1], [1, 1]]})
    assert X == SHIPPED["P1xP1_O11"]


def test_config_validation():
    with pytest.raises(ValidationError):
        MonomialConfig.from_mapping(1, {0: 1, 1: 1})
    with pytest.raises(ValidationError):
        CONIC.check_against(projective_line(2))
    assert MonomialConfig.from_json(CONIC.to_json()) == CONIC


def test_induced_weight_examples():
    assert induced_weight(CONIC, 3, (2,)) == 0
    assert induced_weight(CONIC, 3, (5,)) == 3
    for u, w in CONIC.weights:
        assert induced_weight(CONIC, 1, u) == w


def test_induced_weight_conic_closed_form():
    # min(3u - 2k, k) on 0..2k
    for k in range(1, 9):
        for u in range(2 * k + 1):
            assert induced_weight(CONIC, k, (u,)) == min(3 * u - 2 * k, k)


def test_induced_weight_matches_brute_force_random():
    rng = random.Random(3)
    for X, r, kmax in ((P1, 2, 4), (P2, 1, 3), (SHIPPED["P1xP1_O11"], 1, 3)):
        for _ in range(5):
            c = random_config(rng, X, r)
            for k in range(1, kmax + 1):
                for u in sections(X, k * r):
                    assert induced_weight(c, k, u) == brute_force_induced_weight(c, k, u)


def test_weight_polynomials_product():
    wp = weight_polynomials(PRODUCT, P1)
    for k in range(1, 12):
        assert wp.h_poly(k) == k + 1
        assert wp.w_poly(k) == 0
        assert wp.tr2_poly(k) == Fraction(k * (k + 1) * (k + 2), 3)
        # direct summation: weights 2a - k on 0..k
        assert wp.tr2_poly(k) == sum((2 * a - k) ** 2 for a in range(k + 1))


def test_weight_polynomials_conic():
    wp = weight_polynomials(CONIC, P1)
    for k in range(1, 12):
        ws = [min(3 * u - 2 * k, k) for u in range(2 * k + 1)]
        assert wp.h_poly(k) == 2 * k + 1 == len(ws)
        assert wp.w_poly(k) == Fraction(k * (k - 1), 2) == sum(ws)
        assert wp.tr2_poly(k) == 2 * k ** 3 + Fraction(5, 2) * k ** 2 + Fraction(3, 2) * k
        assert wp.tr2_poly(k) == sum(w * w for w in ws)


def test_zero_config_and_almost_trivial():
    zero = MonomialConfig.from_mapping(1, {0: 0, 1: 0})
    wp = weight_polynomials(zero, P1)
    assert wp.w_poly.degree == -1 and wp.tr2_poly.degree == -1
    assert l2_norm_sq(zero, P1) == 0
    assert is_almost_trivial(zero, P1)
    assert not is_almost_trivial(PRODUCT, P1)
    assert not is_almost_trivial(CONIC, P1)
    with pytest.raises(AlmostTrivial):
        df_classical(zero, P1)


def test_l2_norms():
    assert l2_norm_sq(PRODUCT, P1) == Fraction(1, 3)
    assert l2_norm_sq(CONIC, P1) == Fraction(15, 64)


def test_chow_paper_examples():
    with pytest.raises(ZeroB0):
        chow_paper(PRODUCT, P1, 1)
    assert chow_paper(CONIC, P1, 1) == Fraction(32, 3)
    assert chow_paper(CONIC, P1, 2) == Fraction(316, 15)
    assert chow_paper(CONIC, P1, 1, NormConvention.L2_LIMIT) == 8 / Fraction(15, 64)


def test_df_examples():
    assert df_classical(PRODUCT, P1) == (0, 0.0)
    raw, norm = df_classical(CONIC, P1)
    assert raw == Fraction(3, 8)
    assert norm == pytest.approx(3 / math.sqrt(15), abs=1e-12)
    raw2, norm2 = df_classical(CONIC.scaled(2), P1)
    assert raw2 == Fraction(3, 4)
    assert norm2 == pytest.approx(norm, abs=1e-12)


def test_df_level_convention():
    raw, norm = df_classical(CONIC, P1, NormConvention.LEVEL_R)
    assert raw == Fraction(3, 8)
    assert norm == pytest.approx(0.375 / math.sqrt(0.75), abs=1e-12)


def test_invariant_report():
    rep = invariant_report(CONIC, P1, (1, 2), NormConvention.LEVEL_R)
    data = rep.to_json()
    assert data["df_raw"] == "3/8"
    assert data["l2_norm_sq"] == "15/64"
    assert data["chow_values"] == [[1, "32/3"], [2, "316/15"]]
    assert data["h_poly"] == ["1", "2"] and data["w_poly"] == ["0", "-1/2", "1/2"]
    assert data["verified"]
    prod = invariant_report(PRODUCT, P1).to_json()
    assert prod["notes"] == ["ZeroB0"] and prod["df_raw"] == "0"


@pytest.mark.parametrize("name", sorted(SHIPPED))
def test_ehrhart_leading_coefficient(name):
    X = SHIPPED[name]
    rng = random.Random(11)
    c = random_config(rng, X, 1)
    wp = weight_polynomials(c, X)
    assert leading_coefficient(wp.h_poly, X.dim) == X.volume()
    for k in range(1, 6):
        assert wp.h_poly(k) == len(sections(X, k))


def test_fits_reproduce_direct_sums_on_extra_levels():
    rng = random.Random(5)
    cases = [(X, r) for X, r in ((P1, 1), (P1, 2), (P2, 1), (SHIPPED["P1xP1_O11"], 1))]
    for X, r in cases:
        for _ in range(3):
            a, b = random_config(rng, X, r), random_config(rng, X, r)
            fits = pair_fits(a, b, X, r)
            assert fits.verified
            count = X.dim + 5
            g = fits.granularity
            for j in range(count + 1, count + 4):
                s = level_sums(a, b, X, j * g * r)
                k = j * g
                assert (fits.h(k), fits.total_a(k), fits.total_b(k)) == (s.h, s.total_a, s.total_b)
                assert (fits.aa(k), fits.bb(k), fits.ab(k)) == (s.aa, s.bb, s.ab)


def test_cauchy_schwarz_coherence():
    rng = random.Random(9)
    for X, r in ((P1, 1), (P1, 2), (P2, 1)):
        for _ in range(4):
            a, b = random_config(rng, X, r), random_config(rng, X, r)
            dot, nu, nv = pair_fits(a, b, X, r).traceless_leading()
            assert dot * dot <= nu * nv
            dot, nu, nv = pair_fits(a, a.scaled(3), X, r).traceless_leading()
            assert dot * dot == nu * nv


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 5))
def test_base_change_invariance(seed, p):
    rng = random.Random(seed)
    X, r = rng.choice([(P1, 1), (P1, 2), (P2, 1)])
    c = random_config(rng, X, r)
    if is_almost_trivial(c, X):
        return
    raw, _ = df_classical(c, X)
    raw_p, _ = df_classical(c.scaled(p), X)
    assert raw_p == p * raw
    assert l2_norm_sq(c.scaled(p), X) == p * p * l2_norm_sq(c, X)
    assert df_normalized_signed_square(c.scaled(p), X) == df_normalized_signed_square(c, X)


def test_raise_bundle_invariance():
    rng = random.Random(21)
    configs = [PRODUCT, CONIC] + [random_config(rng, P1, rng.randint(1, 2)) for _ in range(6)]
    for c in configs:
        for k in (2, 3):
            up = raise_bundle(c, k)
            assert l2_norm_sq(up, P1) == l2_norm_sq(c, P1)
            assert df_normalized_signed_square(up, P1) == df_normalized_signed_square(c, P1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_induced_weight_superadditive(seed):
    rng = random.Random(seed)
    X, r = rng.choice([(P1, 1), (P1, 2), (P2, 1)])
    c = random_config(rng, X, r)
    for k, k2 in itertools.product(range(1, 3), repeat=2):
        for u in sections(X, k * r):
            for u2 in sections(X, k2 * r):
                s = tuple(x + y for x, y in zip(u, u2))
                assert induced_weight(c, k + k2, s) >= induced_weight(c, k, u) + induced_weight(c, k2, u2)
