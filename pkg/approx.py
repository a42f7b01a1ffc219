"""
Order-theoretic approximation module.
Grid-backed functions and sequences, compact exhaustions of the real line,
Dini indices and dominators, the constructive Stone-Weierstrass lattice
approximation, and the strict-convergence checks with their two equivalent
characterizations.

Everything here lives on finite grids: a pointwise statement about X is checked
at the grid points only.
"""
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.optimize import linprog

from errors import (
    DomainError,
    EquivalenceError,
    GridMismatchError,
    InputValidationError,
    MonotonicityError,
    NodeBudgetError,
    NumericalError,
    PropernessError,
    SeparationError,
    SequenceExhaustedError,
)

GRID_TOL = 1e-9
ESCAPE_THRESHOLD = 10.0
DEFAULT_NODE_BUDGET = 10000
ADMISSIBILITY_SLACK = 1.05
DEFAULT_BOXES = 9
DETERMINANT_TOL = 1e-12


# ---------------------------------------------------------------------------
# Sampled functions and sequences
# ---------------------------------------------------------------------------

def _as_values(values):
    array = np.asarray(values)
    if array.dtype == object or np.iscomplexobj(array):
        return array
    return array.astype(float)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """
    A function known through its values on a strictly increasing grid.

    Attributes:
        grid (np.ndarray): Strictly increasing sample points
        values (np.ndarray): Function values, same length as grid
    """
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float).ravel()
        values = _as_values(self.values).ravel()
        if len(grid) == 0:
            raise InputValidationError("Sampled function needs at least one grid point")
        if len(grid) != len(values):
            raise InputValidationError(
                f"Grid has {len(grid)} points but {len(values)} values were given"
            )
        steps = np.diff(grid)
        if np.any(steps <= 0):
            bad = int(np.argmax(steps <= 0))
            raise InputValidationError(
                f"Grid not strictly increasing at index {bad + 1} ({grid[bad]} -> {grid[bad + 1]})"
            )
        object.__setattr__(self, 'grid', grid)
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_callable(cls, grid, fn):
        grid = np.asarray(grid, dtype=float)
        return cls(grid, fn(grid))

    @property
    def domain(self):
        return float(self.grid[0]), float(self.grid[-1])

    def __len__(self):
        return len(self.grid)

    def __call__(self, x):
        """Piecewise-linear interpolation; points outside the grid span are refused."""
        points = np.atleast_1d(np.asarray(x, dtype=float))
        lower, upper = self.domain
        outside = (points < lower) | (points > upper)
        if outside.any():
            raise DomainError(float(points[np.argmax(outside)]), lower, upper)
        values = self.values
        if np.iscomplexobj(values):
            result = np.interp(points, self.grid, values.real) + 1j * np.interp(points, self.grid, values.imag)
        else:
            result = np.interp(points, self.grid, np.asarray(values, dtype=float))
        return result if np.ndim(x) else result[0]

    def mask(self, interval):
        """Boolean mask of grid points inside a closed interval."""
        a, b = interval
        return (self.grid >= a) & (self.grid <= b)

    def same_grid(self, other):
        return len(self.grid) == len(other.grid) and np.array_equal(self.grid, other.grid)

    def to_dict(self):
        return {'grid': [float(x) for x in self.grid], 'values': [float(v) for v in self.values]}

    @classmethod
    def from_dict(cls, data):
        return cls(data['grid'], data['values'])


@dataclass(frozen=True, eq=False)
class SampledSequence:
    """
    Finite sequence of sampled functions on a common grid.

    Attributes:
        members (tuple): SampledFunction members g_1..g_K
        dominator (SampledFunction): Optional b with |g_n| <= b on the grid
    """
    members: tuple
    dominator: SampledFunction = None

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise InputValidationError("Sampled sequence needs at least one member")
        first = members[0]
        for n, member in enumerate(members[1:], 2):
            if not first.same_grid(member):
                raise GridMismatchError(f"Member {n} is sampled on a different grid than member 1")
        object.__setattr__(self, 'members', members)
        if self.dominator is not None:
            if not first.same_grid(self.dominator):
                raise GridMismatchError("Dominator is sampled on a different grid than the members")
            excess = np.abs(self.matrix) - np.asarray(self.dominator.values, dtype=float)
            if np.any(excess > GRID_TOL):
                n, i = np.unravel_index(int(np.argmax(excess)), excess.shape)
                raise InputValidationError(
                    f"Dominator fails at member {n + 1}, grid point {first.grid[i]}: "
                    f"|g| exceeds b by {excess[n, i]}"
                )

    @classmethod
    def from_matrix(cls, grid, rows, dominator=None):
        """Build from a (K, len(grid)) array of member values."""
        members = tuple(SampledFunction(grid, row) for row in np.atleast_2d(rows))
        if dominator is not None and not isinstance(dominator, SampledFunction):
            dominator = SampledFunction(grid, dominator)
        return cls(members, dominator)

    @property
    def grid(self):
        return self.members[0].grid

    @property
    def matrix(self):
        return np.vstack([np.asarray(m.values, dtype=float) for m in self.members])

    def __len__(self):
        return len(self.members)

    def to_dict(self):
        data = {
            'grid': [float(x) for x in self.grid],
            'members': [[float(v) for v in m.values] for m in self.members],
        }
        if self.dominator is not None:
            data['dominator'] = [float(v) for v in self.dominator.values]
        return data

    @classmethod
    def from_dict(cls, data):
        return cls.from_matrix(data['grid'], data['members'], data.get('dominator'))


def check_nonincreasing(matrix, grid, grid_tol=GRID_TOL):
    """Raise MonotonicityError at the first (k, x) where f_{k+1}(x) > f_k(x)."""
    if len(matrix) < 2:
        return
    rises = np.diff(matrix, axis=0) > grid_tol
    if rises.any():
        k, i = np.argwhere(rises)[0]
        raise MonotonicityError(int(k) + 1, float(grid[i]))


# ---------------------------------------------------------------------------
# Compact exhaustions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompactExhaustion:
    """
    Nested compact intervals K_1 c K_2 c ..., each inside the interior of the next.

    Attributes:
        boxes (tuple): Closed intervals (a_n, b_n)
    """
    boxes: tuple

    def __post_init__(self):
        boxes = tuple((float(a), float(b)) for a, b in self.boxes)
        if not boxes:
            raise InputValidationError("Exhaustion needs at least one box")
        for n, (a, b) in enumerate(boxes, 1):
            if not a <= b:
                raise InputValidationError(f"Box {n} is empty: [{a}, {b}]")
        for n in range(1, len(boxes)):
            (a0, b0), (a1, b1) = boxes[n - 1], boxes[n]
            if not (a1 < a0 and b0 < b1):
                raise InputValidationError(
                    f"Box {n} = [{a0}, {b0}] is not in the interior of box {n + 1} = [{a1}, {b1}]"
                )
        object.__setattr__(self, 'boxes', boxes)

    def __len__(self):
        return len(self.boxes)

    def box(self, n):
        """K_n, 1-based."""
        return self.boxes[n - 1]

    def radius(self, n):
        a, b = self.box(n)
        return max(abs(a), abs(b))

    def contains(self, n, interval):
        a, b = self.box(n)
        return a <= interval[0] and interval[1] <= b

    def absorbing_index(self, interval):
        """Smallest n with interval contained in K_n, or None if no box absorbs it."""
        for n in range(1, len(self.boxes) + 1):
            if self.contains(n, interval):
                return n
        return None

    def to_dict(self):
        return {'boxes': [list(box) for box in self.boxes]}


def compact_exhaustion(N, base=1.0, domain='real-line'):
    """
    The exhaustion K_n = [-base*n, base*n], n = 1..N, of the real line.

    Args:
        N (int): Number of boxes (N >= 1)
        base (float): Half-width of K_1 (base > 0)
        domain (str): Only 'real-line' is supported

    Returns:
        CompactExhaustion: The nested boxes
    """
    if domain != 'real-line':
        raise InputValidationError(f"Unsupported domain {domain!r}; only 'real-line' is available")
    if N < 1 or not base > 0:
        raise InputValidationError(f"Need N >= 1 and base > 0, got N={N}, base={base}")
    return CompactExhaustion(tuple((-base * n, base * n) for n in range(1, N + 1)))


def default_exhaustion(grid, N=DEFAULT_BOXES):
    """Exhaustion whose largest box reaches N/(N+1) of the grid's radius."""
    radius = float(np.max(np.abs(grid)))
    return compact_exhaustion(N, base=radius / (N + 1) if radius > 0 else 1.0)


# ---------------------------------------------------------------------------
# Dini
# ---------------------------------------------------------------------------

def dini_index(fks, K, eps, grid_tol=GRID_TOL):
    """
    Smallest k with f_k(x) <= eps for every grid point x in K.

    Args:
        fks (SampledSequence): Pointwise nonincreasing sequence f_1, f_2, ...
        K (tuple): Closed interval (a, b)
        eps (float): Target bound (eps > 0)
        grid_tol (float): Slack for the monotonicity check

    Returns:
        int: The 1-based index k; k = 1 or max f_{k-1} > eps on K
    """
    if not eps > 0:
        raise InputValidationError(f"eps must be positive, got {eps}")
    mask = fks.members[0].mask(K)
    if not mask.any():
        raise InputValidationError(f"Interval {K} contains no grid points")
    values = fks.matrix[:, mask]
    check_nonincreasing(values, fks.grid[mask], grid_tol)

    maxima = values.max(axis=1)
    hits = np.flatnonzero(maxima <= eps)
    if len(hits) == 0:
        raise SequenceExhaustedError(float(maxima[-1]), eps)
    return int(hits[0]) + 1


@dataclass(frozen=True, eq=False)
class DiniDominator:
    """h = 1 + p*f_1 together with the indices k with f_k <= eps*h."""
    h: SampledFunction
    ks: tuple
    eps_list: tuple = ()


def dini_dominator(fks, p, eps_list, escape_threshold=ESCAPE_THRESHOLD, grid_tol=GRID_TOL):
    """
    Build the dominator h := 1 + p*f_1 and, per eps, the first k with f_k <= eps*h.

    Args:
        fks (SampledSequence): Nonincreasing sequence decreasing to 0
        p (SampledFunction): Nonnegative proper function on the same grid
        eps_list (list): Bounds eps > 0
        escape_threshold (float): p must exceed this at both ends of the window

    Returns:
        DiniDominator: h and the minimal indices (1-based)
    """
    if not fks.members[0].same_grid(p):
        raise GridMismatchError("p is sampled on a different grid than the sequence")
    weights = np.asarray(p.values, dtype=float)
    if np.any(weights < 0):
        i = int(np.argmax(weights < 0))
        raise InputValidationError(f"p is negative at grid point {p.grid[i]}")
    boundary = float(min(weights[0], weights[-1]))
    if not boundary > escape_threshold:
        raise PropernessError(boundary, escape_threshold)

    values = fks.matrix
    check_nonincreasing(values, fks.grid, grid_tol)
    h = 1.0 + weights * values[0]

    ks = []
    for eps in eps_list:
        if not eps > 0:
            raise InputValidationError(f"eps must be positive, got {eps}")
        fits = np.all(values <= eps * h, axis=1)
        hits = np.flatnonzero(fits)
        if len(hits) == 0:
            raise SequenceExhaustedError(float(np.max(values[-1] / h)), eps)
        ks.append(int(hits[0]) + 1)
    return DiniDominator(SampledFunction(fks.grid, h), tuple(ks), tuple(eps_list))


# ---------------------------------------------------------------------------
# Lattice expressions and constructive Stone-Weierstrass
# ---------------------------------------------------------------------------

LIN, MAX, MIN = 'lin', 'max', 'min'


@dataclass(frozen=True)
class LatticeExpr:
    """
    Expression tree over generators: linear combinations, maxima and minima.

    Attributes:
        op (str): 'lin', 'max' or 'min'
        children (tuple): Sub-expressions of a max/min node
        coeffs (tuple): Coefficients of a lin node
        indices (tuple): Generator indices of a lin node
    """
    op: str
    children: tuple = ()
    coeffs: tuple = ()
    indices: tuple = ()

    def evaluate(self, gen_values):
        """Evaluate on a (n_gens, n_points) array of generator values."""
        gen_values = np.atleast_2d(np.asarray(gen_values, dtype=float))
        if self.op == LIN:
            out = np.zeros(gen_values.shape[1])
            for c, i in zip(self.coeffs, self.indices):
                out = out + c * gen_values[i]
            return out
        parts = [child.evaluate(gen_values) for child in self.children]
        reducer = np.maximum if self.op == MAX else np.minimum
        return reducer.reduce(parts)

    @property
    def node_count(self):
        return 1 + sum(child.node_count for child in self.children)

    def audit(self, n_gens):
        """
        Structural check of the tree.

        Returns:
            list: Problems found (empty when the tree only combines generator
                values by linear combinations, maxima and minima)
        """
        problems = []
        if self.op == LIN:
            if self.children:
                problems.append("lin node has children")
            if len(self.coeffs) != len(self.indices) or not self.indices:
                problems.append("lin node needs matching, nonempty coeffs and indices")
            problems.extend(
                f"generator index {i} out of range" for i in self.indices if not 0 <= i < n_gens
            )
        elif self.op in (MAX, MIN):
            if len(self.children) < 2:
                problems.append(f"{self.op} node has fewer than 2 children")
            for child in self.children:
                problems.extend(child.audit(n_gens))
        else:
            problems.append(f"unknown operation {self.op!r}")
        return problems

    def to_json(self):
        if self.op == LIN:
            return [LIN, [float(c) for c in self.coeffs], [int(i) for i in self.indices]]
        return [self.op] + [child.to_json() for child in self.children]

    @classmethod
    def from_json(cls, data):
        op = data[0]
        if op == LIN:
            return cls(LIN, coeffs=tuple(float(c) for c in data[1]), indices=tuple(int(i) for i in data[2]))
        if op in (MAX, MIN):
            return cls(op, children=tuple(cls.from_json(child) for child in data[1:]))
        raise InputValidationError(f"Unknown lattice operation {op!r}")


def lin(coeffs, indices):
    return LatticeExpr(LIN, coeffs=tuple(float(c) for c in coeffs), indices=tuple(int(i) for i in indices))


def lattice_max(children):
    children = tuple(children)
    return children[0] if len(children) == 1 else LatticeExpr(MAX, children=children)


def lattice_min(children):
    children = tuple(children)
    return children[0] if len(children) == 1 else LatticeExpr(MIN, children=children)


def _gen_matrix(gens, grid, mask):
    for n, g in enumerate(gens):
        if len(g.grid) != len(grid) or not np.array_equal(g.grid, grid):
            raise GridMismatchError(f"Generator {n} is sampled on a different grid than the target")
    return np.vstack([np.asarray(g.values, dtype=float)[mask] for g in gens])


class _LatticeBuilder:
    """Two-point interpolants and the max/min covers of the Stone-Weierstrass proof."""

    def __init__(self, target, gens, points, eps, node_budget):
        self.t = target
        self.G = gens
        self.points = points
        self.eps = eps
        self.node_budget = node_budget
        self.nodes = 0
        self.n_gens = gens.shape[0]

    def _charge(self, count):
        self.nodes += count
        if self.nodes > self.node_budget:
            raise NodeBudgetError(self.node_budget)

    def single(self, x):
        """s_x: the generator largest in magnitude at x, scaled to hit the target there."""
        column = np.abs(self.G[:, x])
        k = int(np.argmax(column))
        if column[k] <= DETERMINANT_TOL:
            if self.t[x] == 0:
                return lin([0.0], [0])
            raise SeparationError(
                (self.points[x], self.points[x]), "every generator vanishes at this point"
            )
        return lin([self.t[x] / self.G[k, x]], [k])

    def pair(self, x, y):
        """r_{x,y}: agrees with the target at x and y."""
        best, best_det = None, 0.0
        scale = max(np.max(np.abs(self.G[:, x])), np.max(np.abs(self.G[:, y])), 1.0)
        for i in range(self.n_gens):
            for j in range(i + 1, self.n_gens):
                det = self.G[i, x] * self.G[j, y] - self.G[j, x] * self.G[i, y]
                if abs(det) > abs(best_det):
                    best, best_det = (i, j), det
        if best is not None and abs(best_det) > DETERMINANT_TOL * scale * scale:
            i, j = best
            system = np.array([[self.G[i, x], self.G[j, x]], [self.G[i, y], self.G[j, y]]])
            a, b = np.linalg.solve(system, np.array([self.t[x], self.t[y]]))
            return lin([a, b], [i, j])
        fallback = self.single(x)
        reach = fallback.evaluate(self.G[:, [y]])[0]
        if abs(reach - self.t[y]) > DETERMINANT_TOL * max(1.0, abs(self.t[y])):
            raise SeparationError(
                (self.points[x], self.points[y]),
                "no generator pair separates the points and the target differs",
            )
        return fallback

    def upper_cover(self, x):
        """r_x >= target - eps everywhere on the points, with r_x(x) = target(x)."""
        parts = [self.single(x)]
        current = parts[0].evaluate(self.G)
        self._charge(1)
        while True:
            gap = self.t - self.eps - current
            y = int(np.argmax(gap))
            if gap[y] <= 0:
                break
            piece = self.pair(x, y)
            self._charge(1)
            parts.append(piece)
            current = np.maximum(current, piece.evaluate(self.G))
        if len(parts) > 1:
            self._charge(1)
        return lattice_max(parts), current

    def build(self):
        start = int(np.argmax(np.abs(self.t)))
        expr, current = self.upper_cover(start)
        parts, covers = [expr], {start}
        while True:
            gap = current - self.t - self.eps
            x = int(np.argmax(gap))
            if gap[x] <= 0:
                break
            if x in covers:
                raise NumericalError(f"Lattice cover stalled at grid point {self.points[x]}")
            covers.add(x)
            piece, values = self.upper_cover(x)
            parts.append(piece)
            current = np.minimum(current, values)
        if len(parts) > 1:
            self._charge(1)
        return lattice_min(parts)


def _validate_separation(t, G, points):
    """Every grid pair with different target values must be separated by the generators."""
    n = len(points)
    n_gens = G.shape[0]
    separated = np.zeros((n, n), dtype=bool)
    for i in range(n_gens):
        for j in range(i + 1, n_gens):
            det = np.outer(G[i], G[j]) - np.outer(G[j], G[i])
            separated |= np.abs(det) > DETERMINANT_TOL
    vanishing = np.max(np.abs(G), axis=0) <= DETERMINANT_TOL
    for x in np.flatnonzero(vanishing & (t != 0)):
        raise SeparationError((points[x], points[x]), "every generator vanishes at this point")
    differs = np.abs(t[:, None] - t[None, :]) > DETERMINANT_TOL
    for x, y in np.argwhere(~separated & differs):
        if x >= y:
            continue
        k = int(np.argmax(np.abs(G[:, x])))
        if abs(G[k, x]) <= DETERMINANT_TOL:
            continue
        reach = t[x] / G[k, x] * G[k, y]
        if abs(reach - t[y]) > DETERMINANT_TOL * max(1.0, abs(t[y])):
            raise SeparationError(
                (float(points[x]), float(points[y])),
                "no generator pair separates the points and the target differs",
            )


def sw_lattice_approx(target, gens, K, eps, node_budget=DEFAULT_NODE_BUDGET):
    """
    Approximate target within eps on grid points of K by a lattice expression
    in the generators.

    For every covering point x, two-point interpolants r_{x,y} are joined by
    maxima into r_x >= target - eps; the r_x are then joined by minima into
    r <= target + eps. Grid points are added to the covers worst-first.

    Args:
        target (SampledFunction): Function to approximate
        gens (list): SampledFunction generators on the target's grid
        K (tuple): Closed interval (a, b)
        eps (float): Uniform error bound (eps > 0)
        node_budget (int): Maximum number of expression nodes

    Returns:
        LatticeExpr: The approximant r with sup |target - r| <= eps on grid and K
    """
    if not eps > 0:
        raise InputValidationError(f"eps must be positive, got {eps}")
    if not gens:
        raise InputValidationError("At least one generator is required")
    mask = target.mask(K)
    if not mask.any():
        raise InputValidationError(f"Interval {K} contains no grid points")
    points = target.grid[mask]
    t = np.asarray(target.values, dtype=float)[mask]
    G = _gen_matrix(gens, target.grid, mask)

    _validate_separation(t, G, points)
    return _LatticeBuilder(t, G, points, eps, node_budget).build()


def lattice_sup_error(expr, target, gens, K):
    """Independent re-evaluation of max |target - expr| over grid points of K."""
    mask = target.mask(K)
    values = np.vstack([np.asarray(g.values, dtype=float) for g in gens])[:, mask]
    approx = expr.evaluate(values)
    return float(np.max(np.abs(np.asarray(target.values, dtype=float)[mask] - approx)))


# ---------------------------------------------------------------------------
# Strict convergence
# ---------------------------------------------------------------------------

def running_supremum(errors):
    """
    f_k(x) = sup_{n >= k} e_n(x) for a (K, n_points) array of errors.

    The result is pointwise nonincreasing in k.
    """
    errors = np.atleast_2d(np.asarray(errors, dtype=float))
    return np.maximum.accumulate(errors[::-1], axis=0)[::-1]


def _box_envelopes(values, grid, exhaustion):
    radii, envelope = [], []
    magnitudes = np.abs(np.asarray(values, dtype=float))
    for n in range(1, len(exhaustion) + 1):
        a, b = exhaustion.box(n)
        inside = (grid >= a) & (grid <= b)
        radii.append(exhaustion.radius(n))
        envelope.append(float(magnitudes[inside].max()) if inside.any() else 0.0)
    return np.array(radii), np.array(envelope)


def minimax_polynomial_fit(x, y, degree):
    """
    Least-maximum-deviation polynomial fit by linear programming.

    Returns:
        tuple: (coefficients in increasing degree, max deviation)
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scale = float(np.max(np.abs(x))) or 1.0
    V = np.vander(x / scale, degree + 1, increasing=True)
    ones = np.ones((len(x), 1))
    A_ub = np.vstack([np.hstack([V, -ones]), np.hstack([-V, -ones])])
    b_ub = np.concatenate([y, -y])
    cost = np.zeros(degree + 2)
    cost[-1] = 1.0
    bounds = [(None, None)] * (degree + 1) + [(0, None)]
    result = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method='highs')
    if not result.success:
        raise NumericalError(f"Minimax polynomial fit failed: {result.message}")
    coeffs = result.x[:-1] / scale ** np.arange(degree + 1)
    return coeffs, float(result.x[-1])


def ideal_admissible(values, grid, ideal, exhaustion, slack=ADMISSIBILITY_SLACK, atol=GRID_TOL):
    """
    Decide whether a sampled function lies in the ideal on the exhaustion window.

    The per-box envelopes max_{K_m}|b| are fitted over the inner half of the
    exhaustion by a least-maximum-deviation polynomial of the ideal's degree;
    the function is admissible when every outer envelope stays within the slack
    of the fitted growth.
    """
    degree = ideal.admissible_degree
    if degree is None:
        return True
    radii, envelope = _box_envelopes(values, grid, exhaustion)
    inner = max(1, math.ceil(len(radii) / 2))
    if inner >= len(radii):
        return True
    coeffs, deviation = minimax_polynomial_fit(radii[:inner], envelope[:inner], degree)
    predicted = np.polynomial.polynomial.polyval(radii[inner:], coeffs)
    return bool(np.all(envelope[inner:] <= slack * (predicted + deviation) + atol))


def solid_admissibility(functions, relations, grid, ideal, exhaustion, window=None, grid_tol=GRID_TOL):
    """
    Ideal membership closed under pointwise domination.

    Each function is first judged by ideal_admissible on its own envelopes.
    A function that fails is still admissible when, on the window, it is
    dominated by the sum of functions already known to be admissible.

    Args:
        functions (dict): name -> sampled values on grid
        relations (list): (name, parts) pairs asking whether |name| <= sum |parts|
        grid (np.ndarray): Common grid
        ideal (IdealSpec): Ideal in force
        exhaustion (CompactExhaustion): Boxes
        window (np.ndarray): Boolean mask where domination is checked (default all points)
        grid_tol (float): Slack for the domination check

    Returns:
        dict: name -> admissible
    """
    window = np.ones(len(grid), dtype=bool) if window is None else window
    magnitudes = {name: np.abs(np.asarray(v, dtype=float)) for name, v in functions.items()}
    admissible = {name: ideal_admissible(v, grid, ideal, exhaustion) for name, v in magnitudes.items()}
    dominated = []
    for name, parts in relations:
        bound = sum(magnitudes[p] for p in parts)
        if np.all(magnitudes[name][window] <= bound[window] + grid_tol):
            dominated.append((name, tuple(parts)))
    changed = True
    while changed:
        changed = False
        for name, parts in dominated:
            if not admissible[name] and all(admissible[p] for p in parts):
                admissible[name] = changed = True
    return admissible


def _validate_window(seq, ghat, exhaustion):
    if not seq.members[0].same_grid(ghat):
        raise GridMismatchError("Limit function is sampled on a different grid than the sequence")
    grid = seq.grid
    for n in range(1, len(exhaustion) + 1):
        a, b = exhaustion.box(n)
        if not np.any((grid >= a) & (grid <= b)):
            raise InputValidationError(f"Exhaustion box {n} = [{a}, {b}] contains no grid points")


def _union_mask(grid, exhaustion):
    a, b = exhaustion.box(len(exhaustion))
    return (grid >= a) & (grid <= b)


@dataclass(frozen=True, eq=False)
class StrictConvergenceResult:
    """
    Outcome of a strict-convergence check.

    Attributes:
        verdict (bool): Strict convergence per the definition
        via_definition (bool): Running-sup sequence decreases to 0 inside the ideal
        via_characterization (bool): Admissible dominator plus uniform convergence on every box
        dominator_admissible (bool): The dominator b lies in the ideal
        box_errors (list): Sup error of the last member on each box
        running_sup (np.ndarray): The f_k of the definition path
        ideal (str): Ideal tag
    """
    verdict: bool
    via_definition: bool
    via_characterization: bool
    dominator_admissible: bool
    box_errors: list
    running_sup: np.ndarray
    ideal: str = ''
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            'verdict': self.verdict,
            'via_definition': self.via_definition,
            'via_characterization': self.via_characterization,
            'dominator_admissible': self.dominator_admissible,
            'box_errors': [float(e) for e in self.box_errors],
            'f_sup': [float(v) for v in self.running_sup.max(axis=1)],
            'ideal': self.ideal,
            'notes': list(self.notes),
        }


def _box_errors(errors, grid, exhaustion):
    out = []
    for n in range(1, len(exhaustion) + 1):
        a, b = exhaustion.box(n)
        inside = (grid >= a) & (grid <= b)
        out.append(float(errors[inside].max()))
    return out


def strict_convergence_check(seq, ghat, ideal, exhaustion=None, grid_tol=GRID_TOL):
    """
    Decide strict convergence of g_n to ghat in two independent ways.

    The definition path builds f_k(x) = sup_{n>=k}|ghat(x) - g_n(x)| and asks
    that it decreases to 0 on the exhaustion window with f_1 and ghat in the
    ideal. The characterization path asks for a dominator b of |g_n| inside the ideal
    together with uniform convergence on every box.

    Args:
        seq (SampledSequence): Members g_1..g_K, optionally with a dominator
        ghat (SampledFunction): Candidate limit on the same grid
        ideal (IdealSpec): Ideal in force
        exhaustion (CompactExhaustion): Boxes (default_exhaustion(grid) if None)
        grid_tol (float): Tolerance for "pointwise infimum 0" and uniform errors

    Returns:
        StrictConvergenceResult: verdict equals via_definition; the two flags agree

    Raises:
        EquivalenceError: If the two characterizations disagree
    """
    exhaustion = exhaustion or default_exhaustion(seq.grid)
    _validate_window(seq, ghat, exhaustion)
    grid = seq.grid
    union = _union_mask(grid, exhaustion)
    limit = np.asarray(ghat.values, dtype=float)
    members = seq.matrix

    errors = np.abs(members - limit)
    fks = running_supremum(errors)
    decreasing_to_zero = bool(np.all(fks[-1][union] <= grid_tol))

    # f_1 <= |ghat| + b, b <= |ghat| + f_1 and |ghat| <= b once converged
    functions = {'limit': limit, 'f_1': fks[0], 'envelope': np.abs(members).max(axis=0)}
    relations = [('f_1', ('limit', 'envelope')), ('envelope', ('limit', 'f_1')), ('limit', ('envelope',))]
    if seq.dominator is not None:
        functions['dominator'] = seq.dominator.values
        relations.append(('envelope', ('dominator',)))
    admissible = solid_admissibility(functions, relations, grid, ideal, exhaustion, union, grid_tol)
    limit_in_ideal = admissible['limit']
    via_definition = decreasing_to_zero and limit_in_ideal and admissible['f_1']

    dominator_admissible = admissible['envelope']
    box_errors = _box_errors(errors[-1], grid, exhaustion)
    via_characterization = dominator_admissible and all(e <= grid_tol for e in box_errors)

    if via_definition != via_characterization:
        raise EquivalenceError(
            f"Strict convergence characterizations disagree: definition={via_definition}, "
            f"characterization={via_characterization} (limit in ideal: {limit_in_ideal}, "
            f"dominator admissible: {dominator_admissible})"
        )
    return StrictConvergenceResult(
        via_definition, via_definition, via_characterization, dominator_admissible,
        box_errors, fks, str(ideal),
    )


@dataclass(frozen=True, eq=False)
class StrictCauchyResult:
    verdict: bool
    via_definition: bool
    via_characterization: bool
    tail_start: int
    oscillation: np.ndarray


def strict_cauchy_check(seq, ideal, exhaustion=None, tail=None, grid_tol=GRID_TOL):
    """
    Strict Cauchy test with f_k(x) = sup_{n,m>=k}|g_n(x) - g_m(x)|.

    A finite sequence is judged on its tail: f_k must be within grid_tol on the
    window from k = K - tail + 1 (tail defaults to half the sequence). The
    characterization side asks for a dominator in the ideal together with a uniformly
    Cauchy tail on every box.

    Returns:
        StrictCauchyResult: Both flags and the oscillation sequence f_k
    """
    exhaustion = exhaustion or default_exhaustion(seq.grid)
    grid = seq.grid
    _validate_window(seq, seq.members[0], exhaustion)
    members = seq.matrix
    K = len(members)
    tail = max(2, K // 2) if tail is None else tail
    start = max(0, K - tail)

    highs = np.maximum.accumulate(members[::-1], axis=0)[::-1]
    lows = np.minimum.accumulate(members[::-1], axis=0)[::-1]
    oscillation = highs - lows
    union = _union_mask(grid, exhaustion)

    tail_settled = bool(np.all(oscillation[start][union] <= grid_tol))

    # f_1 <= 2b, |g_1| <= b and b <= |g_1| + f_1
    functions = {'g_1': members[0], 'f_1': oscillation[0], 'envelope': np.abs(members).max(axis=0)}
    relations = [('f_1', ('envelope', 'envelope')), ('g_1', ('envelope',)), ('envelope', ('g_1', 'f_1'))]
    if seq.dominator is not None:
        functions['dominator'] = seq.dominator.values
        relations.append(('envelope', ('dominator',)))
    admissible = solid_admissibility(functions, relations, grid, ideal, exhaustion, union, grid_tol)
    via_definition = tail_settled and admissible['g_1'] and admissible['f_1']

    box_osc = _box_errors(oscillation[start], grid, exhaustion)
    via_characterization = admissible['envelope'] and all(e <= grid_tol for e in box_osc)

    if via_definition != via_characterization:
        raise EquivalenceError(
            f"Strict Cauchy characterizations disagree: definition={via_definition}, "
            f"characterization={via_characterization}"
        )
    return StrictCauchyResult(via_definition, via_definition, via_characterization, start + 1, oscillation)


def permanence_check(seq, ghat, ideal, exhaustion=None, lam=2.0, h=None, grid_tol=GRID_TOL):
    """
    Check that strict convergence survives scaling, shifts, absolute values
    and squares.

    Squares are checked against the ideal of squared growth.

    Args:
        seq (SampledSequence): Strictly convergent sequence
        ghat (SampledFunction): Its limit
        ideal (IdealSpec): Ideal in force
        exhaustion (CompactExhaustion): Boxes
        lam (float): Scalar for the scaled sequence
        h (SampledFunction): Shift (default the constant 1)

    Returns:
        dict: Transform name -> verdict, plus 'base' for the original sequence
    """
    exhaustion = exhaustion or default_exhaustion(seq.grid)
    grid = seq.grid
    members = seq.matrix
    limit = np.asarray(ghat.values, dtype=float)
    shift = np.ones_like(limit) if h is None else np.asarray(h.values, dtype=float)

    transforms = {
        'scale': (lam * members, lam * limit, ideal),
        'shift': (members + shift, limit + shift, ideal),
        'abs': (np.abs(members), np.abs(limit), ideal),
        'square': (members ** 2, limit ** 2, ideal.squared()),
    }
    outcome = {'base': strict_convergence_check(seq, ghat, ideal, exhaustion, grid_tol).verdict}
    for name, (rows, target, ideal_used) in transforms.items():
        transformed = SampledSequence.from_matrix(grid, rows)
        result = strict_convergence_check(
            transformed, SampledFunction(grid, target), ideal_used, exhaustion, grid_tol
        )
        outcome[name] = result.verdict
    return outcome


# ---------------------------------------------------------------------------
# Console summaries
# ---------------------------------------------------------------------------

def show_strict_result(result, exhaustion):
    """Print the per-box errors and both characterization flags."""
    print("\n" + "="*80)
    print(f"STRICT CONVERGENCE ({result.ideal})")
    print("="*80)
    rows = [
        {'box': n, 'interval': f"[{a:g}, {b:g}]", 'sup_error_last': err}
        for n, ((a, b), err) in enumerate(zip(exhaustion.boxes, result.box_errors), 1)
    ]
    print(pd.DataFrame(rows).to_string(index=False))
    print("-"*80)
    print(f"Dominator admissible: {result.dominator_admissible}")
    print(f"Via definition:       {result.via_definition}")
    print(f"Via characterization: {result.via_characterization}")
    print(f"Verdict:              {result.verdict}")
    print("="*80 + "\n")


def show_lattice(expr, target, gens, K):
    """Print the size and certified error of a lattice approximant."""
    error = lattice_sup_error(expr, target, gens, K)
    print("\n" + "="*80)
    print("STONE-WEIERSTRASS LATTICE APPROXIMATION")
    print("="*80)
    print(f"Interval:       [{K[0]:g}, {K[1]:g}]")
    print(f"Generators:     {len(gens)}")
    print(f"Expression:     {expr.op} with {expr.node_count} nodes")
    print(f"Grid sup error: {error:.3e}")
    print("="*80 + "\n")
