"""
Square-root approximation module.
Builds the recursive polynomials p_0 := 0, p_{n+1} := p_n + (x - p_n^2)/2 that
increase to sqrt(x) on [0, 1], and uses them to approximate |b| by polynomials
in b^2.
"""
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from approx import SampledFunction
from errors import InputValidationError, ScalingError
from poly import Polynomial, arith, identity
from precision import FLOAT64, RATIONAL, coerce, extended, float64, sqrt, to_array, to_float, working_precision

DEFAULT_DEGREE_CAP = 2 ** 16
CERTIFICATE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SqrtSequence:
    """
    The polynomials p_0..p_N of the square-root recursion.

    Only members with at most degree_cap coefficients are stored; values of
    later members come from the pointwise recursion, which is numerically the
    same computation.

    Attributes:
        polys (tuple): Stored polynomials p_0, p_1, ...
        N (int): Index of the last member
        mode (NumericMode): Coefficient precision
        degree_cap (int): Maximum number of stored coefficients
    """
    polys: tuple
    N: int
    mode: object = field(default_factory=float64)
    degree_cap: int = DEFAULT_DEGREE_CAP

    @property
    def stored(self):
        return len(self.polys)

    def poly(self, n):
        """Return p_n; raises if p_n exceeded the degree cap."""
        if not 0 <= n <= self.N:
            raise IndexError(f"Member {n} outside 0..{self.N}")
        if n >= len(self.polys):
            raise InputValidationError(
                f"p_{n} has degree {2 ** (n - 1)} beyond the degree cap {self.degree_cap}; "
                f"use values() for pointwise evaluation"
            )
        return self.polys[n]

    def values(self, x, n=None):
        """Values of p_n (default p_N) on the points x."""
        n = self.N if n is None else n
        if n < len(self.polys):
            return self.polys[n](np.asarray(x) if self.mode.kind == FLOAT64 else to_array(x, self.mode))
        return sqrt_values(x, n, self.mode)


def sqrt_poly_sequence(N, mode=None, degree_cap=DEFAULT_DEGREE_CAP):
    """
    Run the recursion p_{n+1} = p_n + (x - p_n^2)/2 from p_0 = 0.

    Args:
        N (int): Number of recursion steps (N >= 0)
        mode (NumericMode): Coefficient precision (default float64)
        degree_cap (int): Stop storing polynomials above this many coefficients

    Returns:
        SqrtSequence: The sequence p_0..p_N
    """
    if N < 0:
        raise InputValidationError(f"N must be nonnegative, got {N}")
    mode = mode or float64()
    x = identity(mode)
    polys = [Polynomial((), mode)]
    for n in range(N):
        current = polys[-1]
        if 2 * max(current.degree, 1) + 1 > degree_cap:
            break
        step = arith('scale', arith('sub', x, arith('mul', current, current)), coerce('0.5', mode))
        polys.append(arith('add', current, step))
    return SqrtSequence(tuple(polys), N, mode, degree_cap)


def sqrt_values(x, N, mode=None, trace=False):
    """
    Pointwise recursion v_{n+1} = v_n + (x - v_n^2)/2 on grid values.

    Args:
        x (array-like): Points in [0, 1]
        N (int): Number of steps
        mode (NumericMode): Precision of the values (default float64)
        trace (bool): Return all members as rows instead of the last one

    Returns:
        np.ndarray: p_N(x), or an (N+1, len(x)) array of p_0(x)..p_N(x)
    """
    mode = mode or float64()
    points = to_array(np.ravel(x), mode)
    with working_precision(mode):
        half = coerce('0.5', mode)
        current = points * 0
        rows = [current] if trace else None
        for _ in range(N):
            current = current + half * (points - current * current)
            if trace:
                rows.append(current)
    if trace:
        return np.vstack(rows)
    return current


def abs_via_squares(b, lam, N, mode=None):
    """
    Approximate |b| by x -> p_N((lam*b(x))^2) / lam.

    Args:
        b (SampledFunction): Function to take the absolute value of
        lam (float): Scaling with |lam*b| <= 1 on the grid
        N (int): Recursion depth
        mode (NumericMode): Working precision

    Returns:
        SampledFunction: Approximation of |b|, increasing in N
    """
    if not lam > 0:
        raise InputValidationError(f"lam must be positive, got {lam}")
    mode = mode or float64()
    with working_precision(mode):
        factor = coerce(lam, mode)
        scaled = to_array(b.values, mode) * factor
        for point, value in zip(b.grid, scaled):
            if abs(value) > 1:
                raise ScalingError(float(point), to_float(value))
        approx = sqrt_values(scaled * scaled, N, mode) / factor
    return SampledFunction(b.grid, approx)


def _comparison_mode(mode):
    """Square roots of rationals are compared in extended precision."""
    return extended() if mode.kind == RATIONAL else mode


def _roots(grid, mode):
    if mode.kind == FLOAT64:
        return np.sqrt(np.asarray(grid, dtype=float))
    return to_array([sqrt(coerce(x, mode), mode) for x in grid], mode)


def _lift(values, mode, compare):
    return values if compare == mode else to_array(values, compare)


def uniform_error(N, gridsize, mode=None):
    """Max of sqrt(x) - p_N(x) over a uniform grid on [0, 1]."""
    if N < 0 or gridsize < 2:
        raise InputValidationError(f"Need N >= 0 and gridsize >= 2, got N={N}, gridsize={gridsize}")
    mode = mode or float64()
    compare = _comparison_mode(mode)
    grid = np.linspace(0.0, 1.0, gridsize)
    values = sqrt_values(grid, N, mode)
    with working_precision(compare):
        gap = _roots(grid, compare) - _lift(values, mode, compare)
        return to_float(max(gap))


@dataclass(frozen=True)
class SqrtCertificate:
    """Outcome of the grid checks on the square-root recursion."""
    N: int
    gridsize: int
    monotone: bool
    dominated: bool
    contraction: bool
    max_error: float
    first_violation: tuple = None

    @property
    def passed(self):
        return self.monotone and self.dominated and self.contraction


def sqrt_certificate(N, gridsize=1001, tol=CERTIFICATE_TOL, mode=None):
    """
    Check p_n <= p_{n+1} <= sqrt(x) and the contraction
    sqrt(x) - p_{n+1} <= (sqrt(x) - p_n)(1 - sqrt(x)/2) on a uniform grid.

    In rational mode monotonicity and domination (as p_{n+1}^2 <= x) are
    decided exactly; the contraction involves sqrt(x) and is checked in
    extended precision.

    Args:
        N (int): Last recursion index
        gridsize (int): Number of grid points on [0, 1]
        tol (float): Slack for inexact comparisons
        mode (NumericMode): Working precision

    Returns:
        SqrtCertificate: Flags, final sup error and the first violation found
            as (check, n, x)
    """
    mode = mode or float64()
    compare = _comparison_mode(mode)
    exact = mode.is_exact
    grid = np.linspace(0.0, 1.0, gridsize)
    flags = {'monotone': True, 'dominated': True, 'contraction': True}
    first_violation = None

    with working_precision(compare):
        points = to_array(grid, mode)
        roots = _roots(grid, compare)
        half = coerce('0.5', mode)
        factor = 1 - roots * coerce('0.5', compare)
        slack = coerce(tol, compare)
        current = points * 0
        for n in range(N):
            following = current + half * (points - current * current)
            lifted_current = _lift(current, mode, compare)
            lifted_following = _lift(following, mode, compare)
            if exact:
                monotone = following >= current
                dominated = (following >= 0) & (following * following <= points)
            else:
                monotone = following - current >= -slack
                dominated = roots - following >= -slack
            checks = (
                ('monotone', monotone),
                ('dominated', dominated),
                ('contraction', roots - lifted_following <= (roots - lifted_current) * factor + slack),
            )
            for name, ok in checks:
                ok = np.asarray(ok, dtype=bool)
                if not ok.all():
                    flags[name] = False
                    if first_violation is None:
                        first_violation = (name, n, float(grid[np.argmin(ok)]))
            current = following
        max_error = to_float(max(roots - _lift(current, mode, compare)))

    return SqrtCertificate(
        N, gridsize, flags['monotone'], flags['dominated'], flags['contraction'], max_error, first_violation
    )


def show_sqrt_table(N, gridsize=1001, checkpoints=(0, 1, 2, 5, 10, 50, 100, 200)):
    """Print the uniform error of p_n at selected recursion depths."""
    rows = [
        {'n': n, 'uniform_error': uniform_error(n, gridsize), 'bound_2_over_n': 2.0 / n if n else np.nan}
        for n in checkpoints if n <= N
    ]
    print("\n" + "="*80)
    print("SQUARE-ROOT RECURSION")
    print("="*80)
    print(pd.DataFrame(rows).to_string(index=False))
    print("="*80 + "\n")
