from fractions import Fraction

import pytest
from mpmath import mp

from config import PRECISION_ENV_VAR, RunConfig
from precision import (
    EXTENDED,
    FLOAT64,
    RATIONAL,
    auto_mode,
    coerce,
    dynamic_range,
    extended,
    float64,
    infer_mode,
    parse_precision,
    rational,
    working_precision,
)


@pytest.mark.parametrize("tag, kind, bits", [
    ('float64', FLOAT64, 53),
    ('extended', EXTENDED, 256),
    ('extended:512', EXTENDED, 512),
    ('EXTENDED:128', EXTENDED, 128),
    ('rational', RATIONAL, 0),
])
def test_parse_precision(tag, kind, bits):
    mode = parse_precision(tag)
    assert mode.kind == kind
    assert mode.bits == bits


@pytest.mark.parametrize("tag", ['extended:64', 'quad', 'extended:abc'])
def test_parse_precision_rejects(tag):
    with pytest.raises(ValueError):
        parse_precision(tag)


def test_tags():
    assert float64().tag == 'float64'
    assert extended(300).tag == 'extended:300'
    assert rational().tag == 'rational'
    assert rational().is_exact


def test_working_precision_sets_mpmath_bits():
    before = mp.prec
    with working_precision(extended(300)):
        assert mp.prec == 300
    assert mp.prec == before


def test_coerce_keeps_string_digits():
    assert coerce('0.1', rational()) == Fraction(1, 10)
    assert coerce('1/3', rational()) == Fraction(1, 3)
    assert coerce('1/4', float64()) == 0.25
    value = coerce('0.1', extended(256))
    with mp.workprec(256):
        assert abs(value - mp.mpf(1) / 10) < mp.mpf(2) ** -250


def test_coerce_mpf_to_rational_is_exact():
    value = mp.mpf(0.375)
    assert coerce(value, rational()) == Fraction(3, 8)


def test_dynamic_range():
    assert dynamic_range([0, 2, 8]) == 4.0
    assert dynamic_range([0, 0]) == 1.0
    assert dynamic_range(['1', '1e20']) == pytest.approx(1e20)


def test_auto_mode_promotes_wide_ranges():
    assert auto_mode([1.0, 1e13]).kind == EXTENDED
    assert auto_mode([1.0, 1e13]).bits == 256
    assert auto_mode([1.0, 1e6]).kind == FLOAT64
    assert auto_mode([1.0, 1e13], auto_extend=False).kind == FLOAT64
    assert auto_mode([1.0, 1e13], rational()).kind == RATIONAL


def test_infer_mode():
    assert infer_mode([Fraction(1, 2)]).kind == RATIONAL
    assert infer_mode([mp.mpf(1)]).kind == EXTENDED
    assert infer_mode([1.0]).kind == FLOAT64
    assert infer_mode([]).kind == FLOAT64


def test_run_config_defaults_and_overrides():
    config = RunConfig(tolerances={'psd_tol': 1e-8})
    assert config.tol('psd_tol') == 1e-8
    assert config.tol('grid_tol') == 1e-9
    assert config.precision.kind == FLOAT64


def test_run_config_rejects_nonpositive_tolerance():
    with pytest.raises(ValueError):
        RunConfig(tolerances={'grid_tol': 0.0})


def test_run_config_env_override():
    config = RunConfig.from_env({PRECISION_ENV_VAR: 'extended:512'})
    assert config.precision == extended(512)
    assert RunConfig.from_env({}).precision == float64()
