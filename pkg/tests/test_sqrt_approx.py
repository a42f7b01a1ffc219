from fractions import Fraction

import numpy as np
import pytest

from approx import SampledFunction
from errors import InputValidationError, ScalingError
from precision import extended, rational, to_float
from sqrt_approx import (
    abs_via_squares,
    sqrt_certificate,
    sqrt_poly_sequence,
    sqrt_values,
    uniform_error,
)


def test_first_members_exact():
    seq = sqrt_poly_sequence(3, rational())
    assert seq.poly(0).is_zero
    assert seq.poly(1).coeffs == (0, Fraction(1, 2))
    assert seq.poly(2).coeffs == (0, 1, Fraction(-1, 8))
    assert seq.poly(3)(Fraction(1)) == Fraction(127, 128)


def test_p3_at_one_float():
    assert sqrt_poly_sequence(3).poly(3)(1.0) == 0.9921875
    assert sqrt_values([1.0], 3)[0] == 0.9921875


def test_degree_cap_falls_back_to_pointwise_values():
    seq = sqrt_poly_sequence(20, degree_cap=64)
    assert seq.stored < 21
    with pytest.raises(InputValidationError):
        seq.poly(20)
    grid = np.linspace(0, 1, 11)
    np.testing.assert_allclose(seq.values(grid), sqrt_values(grid, 20))
    np.testing.assert_allclose(seq.values(grid, 3), sqrt_values(grid, 3))


def test_negative_N_rejected():
    with pytest.raises(InputValidationError):
        sqrt_poly_sequence(-1)


def test_trace_rows_increase():
    grid = np.linspace(0, 1, 51)
    rows = sqrt_values(grid, 30, trace=True)
    assert rows.shape == (31, 51)
    assert np.all(np.diff(rows, axis=0) >= -1e-15)
    assert np.all(rows <= np.sqrt(grid) + 1e-15)


@pytest.mark.parametrize("N, expected", [(0, 1.0), (1, 0.5)])
def test_uniform_error_small_N(N, expected):
    assert uniform_error(N, 1001) == pytest.approx(expected)


def test_uniform_error_N200():
    assert uniform_error(200, 1001) <= 0.01


def test_uniform_error_decreases():
    errors = [uniform_error(n, 1001) for n in (1, 5, 10, 50, 100)]
    assert errors == sorted(errors, reverse=True)


def test_certificate_float():
    cert = sqrt_certificate(200, gridsize=1001)
    assert cert.passed
    assert cert.first_violation is None
    assert cert.max_error <= 0.01


def test_certificate_rational_exact():
    cert = sqrt_certificate(6, gridsize=11, mode=rational())
    assert cert.monotone and cert.dominated
    assert cert.passed


def test_extended_values_match_float():
    grid = np.linspace(0, 1, 21)
    wide = sqrt_values(grid, 40, extended(256))
    np.testing.assert_allclose([to_float(v) for v in wide], sqrt_values(grid, 40), atol=1e-12)


def test_abs_of_constant_one():
    grid = np.linspace(-1, 1, 5)
    result = abs_via_squares(SampledFunction(grid, np.ones(5)), 1.0, 3)
    np.testing.assert_allclose(result.values, 0.9921875)


def test_abs_of_zero_is_zero():
    grid = np.linspace(-1, 1, 5)
    result = abs_via_squares(SampledFunction(grid, np.zeros(5)), 0.7, 25)
    np.testing.assert_array_equal(result.values, 0.0)


def test_abs_of_identity():
    grid = np.linspace(-1, 1, 401)
    result = abs_via_squares(SampledFunction(grid, grid), 1.0, 200)
    values = np.asarray(result.values, dtype=float)
    assert np.max(np.abs(values - np.abs(grid))) <= 0.01
    assert np.all(values <= np.abs(grid) + 1e-15)


def test_abs_scaling_errors():
    grid = np.linspace(-1, 1, 5)
    b = SampledFunction(grid, 2 * grid)
    with pytest.raises(ScalingError) as info:
        abs_via_squares(b, 1.0, 5)
    assert info.value.point == -1.0
    with pytest.raises(InputValidationError):
        abs_via_squares(b, 0.0, 5)
    abs_via_squares(b, 0.5, 5)
