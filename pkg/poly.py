"""
Dense univariate polynomial module.
Exact coefficient arithmetic in the working precision of a NumericMode.
"""
from dataclasses import dataclass, field

import numpy as np

from precision import FLOAT64, coerce, float64, to_array, working_precision, zero


def _normalize(coeffs):
    """Drop trailing zero coefficients (the zero polynomial keeps none)."""
    end = len(coeffs)
    while end > 0 and coeffs[end - 1] == 0:
        end -= 1
    return tuple(coeffs[:end])


@dataclass(frozen=True)
class Polynomial:
    """
    Polynomial sum_k coeffs[k] * x**k.

    Attributes:
        coeffs (tuple): Coefficients in increasing degree, normalized
        mode (NumericMode): Numeric mode of the coefficients
    """
    coeffs: tuple = ()
    mode: object = field(default_factory=float64)

    def __post_init__(self):
        values = [coerce(c, self.mode) for c in self.coeffs]
        object.__setattr__(self, 'coeffs', _normalize(values))

    @property
    def degree(self):
        """Degree, -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self):
        return not self.coeffs

    def __call__(self, x):
        return evaluate(self, x)

    def __add__(self, other):
        return arith('add', self, other)

    def __radd__(self, other):
        return arith('add', self, other)

    def __sub__(self, other):
        return arith('sub', self, other)

    def __rsub__(self, other):
        return arith('scale', arith('sub', self, other), -1)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return arith('mul', self, other)
        return arith('scale', self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        return arith('scale', self, -1)

    def coefficient(self, k):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else zero(self.mode)

    def as_array(self, length=None):
        """Coefficient vector padded with zeros to the given length."""
        length = len(self.coeffs) if length is None else length
        return to_array([self.coefficient(k) for k in range(length)], self.mode)

    def to_list(self):
        return list(self.coeffs)


def constant(value, mode=None):
    return Polynomial((value,), mode or float64())


def monomial(k, mode=None, scale=1):
    """scale * x**k."""
    return Polynomial((0,) * k + (scale,), mode or float64())


def identity(mode=None):
    """The coordinate function x."""
    return monomial(1, mode)


def evaluate(p, x):
    """
    Evaluate a polynomial by Horner's rule.

    Works for scalars of any numeric type and for numpy arrays of grid points.
    """
    if not p.coeffs:
        return x * 0 if isinstance(x, np.ndarray) else zero(p.mode) * x
    with working_precision(p.mode):
        result = p.coeffs[-1] + x * 0
        for c in reversed(p.coeffs[:-1]):
            result = result * x + c
        return result


def _as_polynomial(value, mode):
    if isinstance(value, Polynomial):
        if value.mode == mode:
            return value
        return Polynomial(value.coeffs, mode)
    return Polynomial((value,), mode)


def _convolve(a, b, mode):
    if mode.kind == FLOAT64:
        return list(np.convolve(np.asarray(a, dtype=float), np.asarray(b, dtype=float)))
    out = [zero(mode)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] = out[i + j] + ai * bj
    return out


def arith(op, p, q):
    """
    Coefficient arithmetic on polynomials.

    Args:
        op (str): One of 'add', 'sub', 'mul', 'scale'
        p (Polynomial): Left operand
        q (Polynomial or number): Right operand; a number for 'scale', a
            number is promoted to a constant polynomial otherwise

    Returns:
        Polynomial: Normalized result in p's numeric mode
    """
    mode = p.mode
    with working_precision(mode):
        if op == 'scale':
            factor = coerce(q, mode)
            return Polynomial(tuple(c * factor for c in p.coeffs), mode)
        other = _as_polynomial(q, mode)
        if op in ('add', 'sub'):
            n = max(len(p.coeffs), len(other.coeffs))
            sign = 1 if op == 'add' else -1
            coeffs = [p.coefficient(k) + sign * other.coefficient(k) for k in range(n)]
            return Polynomial(tuple(coeffs), mode)
        if op == 'mul':
            if p.is_zero or other.is_zero:
                return Polynomial((), mode)
            return Polynomial(tuple(_convolve(p.coeffs, other.coeffs, mode)), mode)
    raise ValueError(f"Unknown polynomial operation: {op}")


def compose(p, q):
    """Coefficients of p(q(x)), built by Horner's rule on polynomials."""
    q = _as_polynomial(q, p.mode)
    result = Polynomial((), p.mode)
    for c in reversed(p.coeffs):
        result = arith('add', arith('mul', result, q), c)
    return result
