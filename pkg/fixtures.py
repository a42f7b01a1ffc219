"""
Reference fixtures for momentgate.
Moment sequences with known determinacy behaviour, a discrete window sequence
whose strict convergence depends on the ideal, the Gauss-Hermite rule with its equal-moment
competitor, and seeded random sequences for property checks.
"""
import math
from fractions import Fraction

import numpy as np
from mpmath import mp

from approx import SampledFunction, SampledSequence
from functionals import MomentSequence, QuadFunctional
from precision import EXTENDED, auto_mode, extended, float64, working_precision


def _sequence(values, mode, auto_extend=True):
    return MomentSequence(tuple(values), auto_mode(values, mode, auto_extend))


def normal_moments(d, mode=None):
    """Standard normal: s_k = (k-1)!! for even k, 0 for odd k."""
    values = []
    for k in range(2 * d + 1):
        if k % 2:
            values.append(0)
        else:
            values.append(math.prod(range(k - 1, 0, -2)))
    return _sequence(values, mode)


def lognormal_moments(d, mode=None, normalized=True):
    """
    Stieltjes' indeterminate example: moments sqrt(pi) e^{(k+1)^2/4} of the
    density e^{-(ln x)^2} on (0, inf), normalized to s_k = e^{k(k+2)/4}.

    Computed in extended precision (256 bits unless a wider mode is given).
    """
    mode = mode or extended()
    if mode.kind != EXTENDED:
        mode = extended()
    with working_precision(mode):
        if normalized:
            values = [mp.exp(mp.mpf(k * (k + 2)) / 4) for k in range(2 * d + 1)]
        else:
            values = [mp.sqrt(mp.pi) * mp.exp(mp.mpf((k + 1) ** 2) / 4) for k in range(2 * d + 1)]
    return MomentSequence(tuple(values), mode)


def uniform_moments(d, mode=None):
    """Uniform probability on [-1, 1]: s_k = 1/(k+1) for even k."""
    values = [Fraction(0) if k % 2 else Fraction(1, k + 1) for k in range(2 * d + 1)]
    return MomentSequence(tuple(values), mode or float64())


def dirac_moments(d, at=0, mode=None):
    """Point mass at `at`: s_k = at**k."""
    values = [Fraction(at) ** k for k in range(2 * d + 1)]
    return MomentSequence(tuple(values), mode or float64())


def moments_from_quadrature(q, d, mode=None):
    """Exact moments s_0..s_{2d} of a discrete measure."""
    return _sequence(q.moments(2 * d + 1), mode)


def gauss_hermite_rule():
    """3-point Gauss rule of the standard normal: nodes 0, +-sqrt(3)."""
    root = np.sqrt(3.0)
    return QuadFunctional([-root, 0.0, root], [1 / 6, 2 / 3, 1 / 6])


def gauss_competitor_rule():
    """
    4-point positive rule sharing the normal moments through degree 5:
    nodes +-1/sqrt(3) with weight 9/22, +-2 with weight 1/11. Its sixth moment
    is 385/33 against 9 for the Gauss rule.
    """
    inner = 1 / np.sqrt(3.0)
    return QuadFunctional([-2.0, -inner, inner, 2.0], [1 / 11, 9 / 22, 9 / 22, 1 / 11])


def diagonal_window_sequence(size=100):
    """
    Discrete window {1..size} of the natural numbers with g_n = n * 1_{n}.

    The sequence converges strictly to 0 when every continuous function is
    admissible (dominator x -> x), but not in the ideal of bounded functions.

    Returns:
        tuple: (SampledSequence, zero limit)
    """
    grid = np.arange(1, size + 1, dtype=float)
    rows = np.diag(grid)
    return SampledSequence.from_matrix(grid, rows), SampledFunction(grid, np.zeros(size))


MOMENT_FIXTURES = {
    'normal': normal_moments,
    'lognormal': lognormal_moments,
    'uniform': uniform_moments,
    'dirac': dirac_moments,
}


def moment_fixture(name, d, mode=None):
    if name not in MOMENT_FIXTURES:
        raise KeyError(f"Unknown fixture {name!r}; choose from {sorted(MOMENT_FIXTURES)}")
    return MOMENT_FIXTURES[name](d, mode=mode)


def random_decreasing_sequence(rng, grid, K, scale=1.0):
    """f_1 >= f_2 >= ... > 0 pointwise, shrinking by random factors in [0.3, 0.95]."""
    start = scale * rng.uniform(0.5, 1.5, len(grid))
    factors = rng.uniform(0.3, 0.95, (K, len(grid)))
    factors[0] = 1.0
    return SampledSequence.from_matrix(grid, start * np.cumprod(factors, axis=0))


STRICT_KINDS = ('decaying', 'growing', 'moving')


def random_strict_fixture(rng, kind, grid=None, K=30):
    """
    Seeded sequences for the strict-convergence equivalence checks.

    'decaying': g_n = ghat + c rho^n bump(x - x0), uniformly convergent with
        all suprema attained near the origin (bounded dominator).
    'growing':  g_n = ghat + rho^n x^2, uniformly convergent on compacts but
        with a quadratically growing dominator.
    'moving':   g_n = ghat + h bump(x - x_n) with the bump travelling outwards,
        so the sequence does not converge uniformly.

    Returns:
        tuple: (SampledSequence, ghat)
    """
    grid = np.linspace(-20.0, 20.0, 161) if grid is None else np.asarray(grid, dtype=float)
    a = rng.uniform(0.5, 2.0)
    ghat = a / (1.0 + grid ** 2)
    n = np.arange(1, K + 1)[:, None]

    if kind == 'decaying':
        c = rng.uniform(0.1, 2.0)
        rho = rng.uniform(0.05, 0.3)
        x0 = rng.uniform(-1.0, 1.0)
        bump = np.exp(-(grid - x0) ** 2)
        rows = ghat + c * rho ** n * bump
        dominator = ghat + c * bump if rng.random() < 0.5 else None
        seq = SampledSequence.from_matrix(grid, rows, dominator)
    elif kind == 'growing':
        rho = rng.uniform(0.05, 0.2)
        rows = ghat + rho ** n * grid ** 2
        seq = SampledSequence.from_matrix(grid, rows)
    elif kind == 'moving':
        h = rng.uniform(0.5, 2.0)
        centers = np.linspace(0.0, grid[-1] * 0.8, K)[:, None]
        rows = ghat + h * np.exp(-(grid - centers) ** 2)
        seq = SampledSequence.from_matrix(grid, rows)
    else:
        raise KeyError(f"Unknown fixture kind {kind!r}")
    return seq, SampledFunction(grid, ghat)
