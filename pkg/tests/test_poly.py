from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poly import Polynomial, arith, compose, constant, evaluate, identity, monomial
from precision import coerce, extended, rational

x = identity()


@pytest.mark.parametrize("p, point, expected", [
    (monomial(2), 3, 9),
    (Polynomial(()), 5, 0),
    (Polynomial((0, 1, -1 / 8)), 1, 0.875),
])
def test_evaluate(p, point, expected):
    assert evaluate(p, point) == expected


def test_evaluate_on_grid():
    grid = np.linspace(-1, 1, 5)
    np.testing.assert_allclose(evaluate(Polynomial((1, 0, 2)), grid), 1 + 2 * grid ** 2)
    np.testing.assert_array_equal(evaluate(Polynomial(()), grid), np.zeros(5))


def test_normalization_drops_trailing_zeros():
    p = Polynomial((1, 2, 0, 0))
    assert p.coeffs == (1.0, 2.0)
    assert p.degree == 1
    assert Polynomial((0, 0)).degree == -1
    assert Polynomial((0, 0)).is_zero


def test_arith_examples():
    assert arith('add', x, -x).is_zero
    assert arith('mul', x + 1, x - 1).coeffs == (-1.0, 0.0, 1.0)
    assert arith('scale', monomial(2), 0.5).coeffs == (0.0, 0.0, 0.5)
    with pytest.raises(ValueError):
        arith('div', x, x)


def test_operators_match_arith():
    p = Polynomial((1, 2))
    assert (p * p).coeffs == (1.0, 4.0, 4.0)
    assert (3 - p).coeffs == (2.0, -2.0)
    assert (2 * p).coeffs == (2.0, 4.0)
    assert (-p).coeffs == (-1.0, -2.0)


def test_compose_examples():
    assert compose(monomial(2), x + 1).coeffs == (1.0, 2.0, 1.0)
    p = Polynomial((3, 1, 4))
    assert compose(p, Polynomial(())).coeffs == (3.0,)
    assert compose(Polynomial((0, 0.5)), monomial(2)).coeffs == (0.0, 0.0, 0.5)


def test_rational_arithmetic_is_exact():
    third = Polynomial((Fraction(1, 3),), rational())
    assert (third * 3).coeffs == (Fraction(1),)
    p = Polynomial((0, 1, Fraction(-1, 8)), rational())
    assert p(Fraction(1)) == Fraction(7, 8)


def test_extended_mode_coefficients():
    mode = extended(256)
    p = constant('0.1', mode) * 3
    assert abs(p.coeffs[0] - coerce('0.3', mode)) < 1e-70


small_coeffs = st.lists(st.integers(-5, 5), max_size=6)


@settings(max_examples=200)
@given(small_coeffs, small_coeffs, st.integers(-3, 3))
def test_product_evaluates_pointwise(a, b, point):
    mode = rational()
    p, q = Polynomial(tuple(a), mode), Polynomial(tuple(b), mode)
    value = Fraction(point)
    assert (p * q)(value) == p(value) * q(value)
    assert (p + q)(value) == p(value) + q(value)


@settings(max_examples=200)
@given(small_coeffs, small_coeffs, st.integers(-4, 4), st.integers(1, 4))
def test_compose_evaluates_nested_exactly(a, b, num, den):
    mode = rational()
    p, q = Polynomial(tuple(a), mode), Polynomial(tuple(b), mode)
    point = Fraction(num, den)
    assert compose(p, q)(point) == p(q(point))


@settings(max_examples=200)
@given(small_coeffs, small_coeffs, st.floats(-1.5, 1.5))
def test_compose_evaluates_nested(a, b, point):
    p, q = Polynomial(tuple(a)), Polynomial(tuple(b))
    p_abs = Polynomial(tuple(abs(c) for c in p.coeffs))
    q_abs = Polynomial(tuple(abs(c) for c in q.coeffs))
    bound = max(1.0, p_abs(q_abs(abs(point))))
    assert abs(compose(p, q)(point) - p(q(point))) <= 1e-12 * bound
