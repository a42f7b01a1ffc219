"""
Numeric mode module for momentgate.
Handles the working precision shared by polynomials, Hankel matrices and
Jacobi operators: standard binary floats, mpmath extended precision, or exact
rationals.
"""
import math
from contextlib import nullcontext
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from mpmath import mp

FLOAT64 = 'float64'
EXTENDED = 'extended'
RATIONAL = 'rational'

DEFAULT_EXTENDED_BITS = 256
MIN_EXTENDED_BITS = 128
DYNAMIC_RANGE_LIMIT = 1e12


@dataclass(frozen=True)
class NumericMode:
    """Working precision: kind is 'float64', 'extended' or 'rational'."""
    kind: str = FLOAT64
    bits: int = 53

    def __post_init__(self):
        if self.kind not in (FLOAT64, EXTENDED, RATIONAL):
            raise ValueError(f"Unknown numeric mode: {self.kind}")
        if self.kind == EXTENDED and self.bits < MIN_EXTENDED_BITS:
            raise ValueError(
                f"Extended precision needs at least {MIN_EXTENDED_BITS} bits, got {self.bits}"
            )

    @property
    def tag(self):
        """Precision tag written into reports, e.g. 'extended:256'."""
        if self.kind == EXTENDED:
            return f"{EXTENDED}:{self.bits}"
        return self.kind

    @property
    def is_exact(self):
        return self.kind == RATIONAL


def float64():
    return NumericMode(FLOAT64, 53)


def extended(bits=DEFAULT_EXTENDED_BITS):
    return NumericMode(EXTENDED, int(bits))


def rational():
    return NumericMode(RATIONAL, 0)


def parse_precision(text):
    """
    Parse a precision tag such as 'float64', 'extended', 'extended:512' or 'rational'.

    Args:
        text (str): Precision tag (case-insensitive)

    Returns:
        NumericMode: The parsed mode
    """
    value = text.strip().lower()
    if value in ('float', 'float64', 'double'):
        return float64()
    if value == RATIONAL:
        return rational()
    if value.startswith(EXTENDED):
        _, _, bits = value.partition(':')
        return extended(int(bits) if bits else DEFAULT_EXTENDED_BITS)
    raise ValueError(f"Unknown precision tag: {text!r}")


def working_precision(mode):
    """Context manager setting mpmath's working precision for extended mode."""
    if mode.kind == EXTENDED:
        return mp.workprec(mode.bits)
    return nullcontext()


def coerce(value, mode):
    """
    Convert a number (int, float, str, Fraction, mpf) into the scalar type of a mode.

    Strings are parsed exactly where the mode allows it, so decimal moment
    values read from JSON keep all their digits in extended and rational mode.
    Strings of the form 'p/q' are read as fractions.
    """
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, str) and '/' in value:
        value = Fraction(value)
    if mode.kind == FLOAT64:
        return float(value)
    if mode.kind == RATIONAL:
        if isinstance(value, (Fraction, int, str, float)):
            return Fraction(value)
        man, exp = int(value.man), int(value.exp)
        return Fraction(man * 2 ** exp) if exp >= 0 else Fraction(man, 2 ** -exp)
    with mp.workprec(mode.bits):
        if isinstance(value, Fraction):
            return mp.mpf(value.numerator) / value.denominator
        return mp.mpf(value)


def zero(mode):
    return coerce(0, mode)


def one(mode):
    return coerce(1, mode)


def to_array(values, mode):
    """Numpy vector carrying scalars of the mode (object dtype outside float64)."""
    if mode.kind == FLOAT64:
        return np.array([float(v) for v in values], dtype=float)
    return np.array([coerce(v, mode) for v in values], dtype=object)


def to_matrix(rows, mode):
    if mode.kind == FLOAT64:
        return np.array([[coerce(v, mode) for v in row] for row in rows], dtype=float)
    return np.array([[coerce(v, mode) for v in row] for row in rows], dtype=object)


def zeros(shape, mode):
    if mode.kind == FLOAT64:
        return np.zeros(shape, dtype=float)
    out = np.empty(shape, dtype=object)
    out.fill(zero(mode))
    return out


def sqrt(value, mode):
    """Square root in the mode; rational values are rooted in extended precision."""
    if mode.kind == FLOAT64:
        return math.sqrt(value)
    if mode.kind == RATIONAL:
        return mp.sqrt(mp.mpf(value.numerator) / value.denominator)
    return mp.sqrt(value)


def to_float(value):
    """Plain float (or complex) of any supported scalar, for reports and tables."""
    if isinstance(value, (complex, mp.mpc)):
        return complex(value)
    return float(value)


def dynamic_range(values):
    """Ratio of the largest to the smallest nonzero absolute value."""
    magnitudes = [abs(coerce(v, extended()) if isinstance(v, str) else v) for v in values]
    nonzero = [m for m in magnitudes if m != 0]
    if not nonzero:
        return 1.0
    return float(max(nonzero) / min(nonzero))


def infer_mode(values):
    """Mode matching the scalar type of the first value (float64 for plain floats)."""
    for value in values:
        if isinstance(value, Fraction):
            return rational()
        if isinstance(value, (mp.mpf, mp.mpc)):
            return extended(max(mp.prec, DEFAULT_EXTENDED_BITS))
        return float64()
    return float64()


def auto_mode(values, requested=None, auto_extend=True):
    """
    Pick the working precision for a moment sequence.

    Float64 requests are promoted to extended precision when the dynamic range
    of the moments exceeds 1e12.

    Args:
        values (list): Moment values
        requested (NumericMode): Mode asked for by the caller (default float64)
        auto_extend (bool): Set False to keep float64 regardless of range

    Returns:
        NumericMode: The mode to compute in
    """
    requested = requested or float64()
    if requested.kind != FLOAT64 or not auto_extend:
        return requested
    if dynamic_range(values) > DYNAMIC_RANGE_LIMIT:
        return extended(DEFAULT_EXTENDED_BITS)
    return requested
