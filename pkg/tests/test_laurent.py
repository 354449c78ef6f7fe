from fractions import Fraction

import numpy as np
from hypothesis import given, settings, strategies as st

from bandunitary import LaurentMatrix, LaurentPoly

coeff = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)
polys = st.builds(LaurentPoly, st.integers(-5, 5), st.lists(coeff, min_size=1, max_size=6))
points = st.complex_numbers(min_magnitude=0.5, max_magnitude=2, allow_nan=False,
                            allow_infinity=False)


def test_normalization_strips_zeros():
    p = LaurentPoly(-3, [0, 0, 2, 0, 5, 0])
    assert p.low == -1 and p.high == 1 and p.span == 2
    assert LaurentPoly(4, [0, 0]).is_zero


@settings(max_examples=50, deadline=None)
@given(polys, polys, points)
def test_ring_operations_match_evaluation(p, q, x):
    assert np.isclose((p + q)(x), p(x) + q(x), atol=1e-9)
    assert np.isclose((p - q)(x), p(x) - q(x), atol=1e-9)
    assert np.isclose((p * q)(x), p(x) * q(x), rtol=1e-9, atol=1e-9)
    assert np.isclose(p.reflect()(x), p(1 / x), rtol=1e-9, atol=1e-9)
    assert np.isclose(p.shift(3)(x), p(x) * x ** 3, rtol=1e-9, atol=1e-9)


def test_exact_arithmetic():
    h = Fraction(1, 2)
    p = LaurentPoly(-1, [h, 0, h], exact=True)
    sq = p * p
    assert sq.as_dict() == {-2: Fraction(1, 4), 0: Fraction(1, 2), 2: Fraction(1, 4)}
    assert (p ** 3).coefficient(1) == Fraction(3, 8)
    assert sq == LaurentPoly(-2, [Fraction(1, 4), 0, Fraction(1, 2), 0, Fraction(1, 4)])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32), points)
def test_matrix_product_matches_evaluation(seed, z):
    rng = np.random.default_rng(seed)
    a = LaurentMatrix(-1, rng.normal(size=(3, 2, 2)) + 1j * rng.normal(size=(3, 2, 2)))
    b = LaurentMatrix(0, rng.normal(size=(2, 2, 2)) + 1j * rng.normal(size=(2, 2, 2)))
    assert np.allclose((a @ b)(z), a(z) @ b(z), rtol=1e-9, atol=1e-9)
    row = LaurentMatrix(0, rng.normal(size=(1, 1, 2)) + 0j)
    col = LaurentMatrix(1, rng.normal(size=(2, 2, 1)) + 0j)
    assert np.isclose((row @ col).to_poly()(z), (row(z) @ col(z))[0, 0])
