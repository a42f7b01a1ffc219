"""
Positive linear functionals module.
Moment sequences act on polynomials, quadratures act on polynomials and sampled
functions; both feed the strict-continuity and coincidence checks.
"""
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from approx import GRID_TOL, SampledFunction, check_nonincreasing, sw_lattice_approx, lattice_sup_error
from errors import DegreeOverflowError, InputValidationError, SeparationError
from poly import Polynomial, arith, constant, evaluate
from precision import auto_mode, coerce, float64, to_float, working_precision, zero

COINCIDENCE_TOL = 1e-10
MAX_ALGEBRA_ELEMENTS = 5000


@dataclass(frozen=True)
class IdealSpec:
    """
    Riesz ideal in force: 'all' continuous functions, uniformly 'bounded' ones,
    or 'poly'-nomially bounded ones up to degree maxdeg.
    """
    kind: str = 'all'
    maxdeg: int = None

    def __post_init__(self):
        if self.kind not in ('all', 'bounded', 'poly'):
            raise InputValidationError(f"Unknown ideal {self.kind!r}")
        if self.kind == 'poly' and (self.maxdeg is None or self.maxdeg < 0):
            raise InputValidationError(f"Polynomially bounded ideal needs maxdeg >= 0, got {self.maxdeg}")

    @classmethod
    def parse(cls, text):
        """Parse 'all', 'bounded' or 'poly:D'."""
        value = text.strip().lower()
        if value in ('all', 'bounded'):
            return cls(value)
        if value.startswith('poly:'):
            try:
                return cls('poly', int(value.split(':', 1)[1]))
            except ValueError:
                pass
        raise InputValidationError(f"Unknown ideal {text!r}; use all, bounded or poly:D")

    @property
    def admissible_degree(self):
        """Allowed growth degree of a dominator, None when unrestricted."""
        if self.kind == 'all':
            return None
        if self.kind == 'bounded':
            return 0
        return self.maxdeg

    def squared(self):
        if self.kind == 'poly':
            return IdealSpec('poly', 2 * self.maxdeg)
        return self

    def __str__(self):
        return f"poly:{self.maxdeg}" if self.kind == 'poly' else self.kind


@dataclass(frozen=True)
class MomentSequence:
    """
    Moments s_0..s_{2d} of a positive functional on polynomials.

    Attributes:
        moments (tuple): Values s_k in the sequence's numeric mode
        mode (NumericMode): Working precision
    """
    moments: tuple
    mode: object = field(default_factory=float64)

    def __post_init__(self):
        moments = tuple(coerce(s, self.mode) for s in self.moments)
        if len(moments) % 2 != 1:
            raise InputValidationError(
                f"Moment sequence needs odd length 2d+1, got {len(moments)} values"
            )
        if not moments[0] > 0:
            raise InputValidationError(f"s_0 must be positive, got {moments[0]}")
        object.__setattr__(self, 'moments', moments)

    @property
    def degree(self):
        """The parameter d (moments up to s_{2d})."""
        return (len(self.moments) - 1) // 2

    @property
    def max_degree(self):
        return len(self.moments) - 1

    def __len__(self):
        return len(self.moments)

    def __getitem__(self, k):
        return self.moments[k]

    def apply(self, p):
        return moment_functional_eval(self, p)

    def normalized(self):
        with working_precision(self.mode):
            s0 = self.moments[0]
            return MomentSequence(tuple(s / s0 for s in self.moments), self.mode)

    def rescaled(self, c):
        with working_precision(self.mode):
            factor = coerce(c, self.mode)
            return MomentSequence(tuple(s * factor for s in self.moments), self.mode)

    def with_mode(self, mode):
        return MomentSequence(self.moments, mode)

    def truncated(self, d):
        """Moments s_0..s_{2d}."""
        if d > self.degree:
            raise InputValidationError(f"Cannot truncate degree {self.degree} sequence to d={d}")
        return MomentSequence(self.moments[:2 * d + 1], self.mode)

    def to_dict(self):
        return {'degree': self.degree, 'moments': list(self.moments)}

    @classmethod
    def from_dict(cls, data, mode=None, auto_extend=True):
        """
        Read {"degree": d, "moments": [s_0, ..., s_2d]}.

        The numeric mode is chosen by auto_mode from the moments' dynamic range
        unless a non-float64 mode is requested.
        """
        if 'moments' not in data:
            raise InputValidationError("Moment file needs a 'moments' list")
        values = list(data['moments'])
        if 'degree' in data and len(values) != 2 * int(data['degree']) + 1:
            raise InputValidationError(
                f"Degree {data['degree']} requires {2 * int(data['degree']) + 1} moments, got {len(values)}"
            )
        return cls(tuple(values), auto_mode(values, mode, auto_extend))


@dataclass(frozen=True, eq=False)
class QuadFunctional:
    """
    Discrete positive functional f -> sum_i w_i f(x_i).

    Attributes:
        nodes (np.ndarray): Quadrature nodes
        weights (np.ndarray): Nonnegative weights
    """
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if len(nodes) != len(weights) or len(nodes) == 0:
            raise InputValidationError(
                f"Quadrature needs matching, nonempty nodes and weights ({len(nodes)} vs {len(weights)})"
            )
        if np.any(weights < 0):
            i = int(np.argmax(weights < 0))
            raise InputValidationError(f"Weight {weights[i]} at node {nodes[i]} is negative")
        object.__setattr__(self, 'nodes', nodes)
        object.__setattr__(self, 'weights', weights)

    def apply(self, f):
        return quadrature_functional_eval(self, f)

    def moments(self, count):
        """s_0..s_{count-1} of the discrete measure."""
        return [float(np.sum(self.weights * self.nodes ** k)) for k in range(count)]

    @property
    def span(self):
        return float(self.nodes.min()), float(self.nodes.max())

    def to_dict(self):
        return {'nodes': [float(x) for x in self.nodes], 'weights': [float(w) for w in self.weights]}

    @classmethod
    def from_dict(cls, data):
        return cls(data['nodes'], data['weights'])


def point_mass(x, weight=1.0):
    """The functional weight * delta_x."""
    return QuadFunctional([x], [weight])


def moment_functional_eval(ms, p):
    """
    Apply the moment functional to a polynomial: sum_k c_k s_k.

    Raises:
        DegreeOverflowError: If deg p exceeds 2d
    """
    if p.degree > ms.max_degree:
        raise DegreeOverflowError(p.degree, ms.max_degree)
    mode = ms.mode
    with working_precision(mode):
        total = zero(mode)
        for c, s in zip(p.coeffs, ms.moments):
            total = total + coerce(c, mode) * s
        return total


def quadrature_functional_eval(q, f):
    """
    sum_i w_i f(x_i) for a Polynomial, SampledFunction or vectorized callable.

    Sampled functions are interpolated piecewise-linearly; a node outside the
    sampled domain raises DomainError.
    """
    if isinstance(f, Polynomial):
        values = np.array([to_float(evaluate(f, float(x))) for x in q.nodes])
    else:
        values = np.asarray(f(q.nodes))
    return np.sum(q.weights * values)


@dataclass(frozen=True, eq=False)
class ContinuityVerdict:
    """
    Strict-continuity outcome for one decreasing sequence.

    Attributes:
        passed (bool): min trace <= tol and the trace is nonincreasing
        trace (list): Phi(f_1)..Phi(f_K)
        pointwise_floor (float): max over grid points of min_k f_k(x)
    """
    passed: bool
    trace: list
    pointwise_floor: float
    nonincreasing: bool = True

    def to_dict(self):
        return {
            'passed': self.passed,
            'trace': [float(v) for v in self.trace],
            'pointwise_floor': self.pointwise_floor,
            'nonincreasing': self.nonincreasing,
        }


def strict_continuity_check(phi, fks, tol=GRID_TOL, grid_tol=GRID_TOL):
    """
    Apply phi along a pointwise decreasing sequence and check that the values
    decrease to (below) tol.

    Args:
        phi (QuadFunctional): Positive functional on sampled functions
        fks (SampledSequence): Pointwise nonincreasing sequence f_1..f_K
        tol (float): Bound for min_k Phi(f_k)
        grid_tol (float): Slack for the monotonicity validation

    Returns:
        ContinuityVerdict: Pass flag, trace and pointwise floor
    """
    values = fks.matrix
    check_nonincreasing(values, fks.grid, grid_tol)
    trace = [float(phi.apply(member)) for member in fks.members]
    steps = np.diff(trace)
    scale = max(1.0, max(abs(v) for v in trace))
    nonincreasing = bool(np.all(steps <= 1e-12 * scale))
    passed = nonincreasing and min(trace) <= tol
    floor = float(values.min(axis=0).max())
    return ContinuityVerdict(passed, trace, floor, nonincreasing)


def algebra_elements(gens, maxdeg, mode=None):
    """
    Products of generators (including the empty product 1) of degree <= maxdeg,
    ordered by degree and deduplicated.
    """
    mode = mode or (gens[0].mode if gens else float64())
    unit = constant(1, mode)
    seen = {unit.coeffs}
    elements = [unit]
    frontier = [unit]
    while frontier:
        following = []
        for element in frontier:
            for g in gens:
                product = arith('mul', element, g)
                if product.is_zero or product.degree > maxdeg or product.coeffs in seen:
                    continue
                seen.add(product.coeffs)
                following.append(product)
                if len(elements) + len(following) > MAX_ALGEBRA_ELEMENTS:
                    raise InputValidationError(
                        f"Generated algebra exceeds {MAX_ALGEBRA_ELEMENTS} elements below degree {maxdeg}"
                    )
        elements.extend(following)
        frontier = following
    elements.sort(key=lambda e: e.degree)
    return elements


def _default_battery(lower, upper):
    middle = 0.5 * (lower + upper)
    return {
        f"|x - {middle:g}|": lambda x: np.abs(x - middle),
        "exp(-x^2)": lambda x: np.exp(-x ** 2),
    }


@dataclass(frozen=True, eq=False)
class CoincidenceReport:
    """
    Where two functionals first differ on the algebra generated by gens.

    Attributes:
        agree (bool): No disagreement up to the tested degree
        tested_degree (int): Degree bound actually tested
        checked (int): Number of algebra elements compared
        degree (int): Degree of the first disagreeing element
        element (Polynomial): First disagreeing element
        phi_value, psi_value: Functional values there
        discrepancy (float): |phi_value - psi_value|
        battery (list): Per test function, direct and lattice-approximant discrepancies
        max_discrepancy (float): Largest lattice-approximant discrepancy
        notes (list): Skipped battery entries and similar remarks
    """
    agree: bool
    tested_degree: int
    checked: int
    degree: int = None
    element: Polynomial = None
    phi_value: float = None
    psi_value: float = None
    discrepancy: float = 0.0
    battery: list = field(default_factory=list)
    max_discrepancy: float = 0.0
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            'agree': self.agree,
            'tested_degree': self.tested_degree,
            'checked': self.checked,
            'degree': self.degree,
            'element': None if self.element is None else [to_float(c) for c in self.element.coeffs],
            'phi_value': self.phi_value,
            'psi_value': self.psi_value,
            'discrepancy': self.discrepancy,
            'battery': list(self.battery),
            'max_discrepancy': self.max_discrepancy,
            'notes': list(self.notes),
        }


def _battery_discrepancies(phi, psi, gens, battery, eps, gridsize):
    lower = min(phi.span[0], psi.span[0]) - 1.0
    upper = max(phi.span[1], psi.span[1]) + 1.0
    grid = np.linspace(lower, upper, gridsize)
    samples = [SampledFunction(grid, np.ones_like(grid))]
    samples += [SampledFunction(grid, np.array([to_float(evaluate(g, x)) for x in grid])) for g in gens]
    battery = battery or _default_battery(lower, upper)

    rows, notes = [], []
    for name, fn in battery.items():
        target = SampledFunction.from_callable(grid, fn)
        try:
            expr = sw_lattice_approx(target, samples, (lower, upper), eps)
        except SeparationError as exc:
            notes.append(f"{name}: {exc}")
            continue
        approximant = SampledFunction(grid, expr.evaluate([s.values for s in samples]))
        rows.append({
            'function': name,
            'direct': abs(float(phi.apply(target)) - float(psi.apply(target))),
            'approximant': abs(float(phi.apply(approximant)) - float(psi.apply(approximant))),
            'approximation_error': lattice_sup_error(expr, target, samples, (lower, upper)),
        })
    return rows, notes


def coincidence_demo(phi, psi, gens, testdeg, tol=COINCIDENCE_TOL, battery=None, eps=0.05, gridsize=201):
    """
    Compare two positive functionals on the algebra generated by gens.

    Elements are compared in order of degree; the first one on which phi and
    psi differ by more than tol (relative to their size) is reported. When the
    functionals agree up to testdeg and both are quadratures, a battery of
    non-polynomial test functions is approximated by lattice expressions in
    the generators and both functionals are applied to the approximants.

    Only grid-level separation is examined; no claim is made about the
    continuum.

    Args:
        phi, psi (MomentSequence or QuadFunctional): Functionals to compare
        gens (list): Polynomial generators
        testdeg (int): Highest degree compared (capped by available moments)
        tol (float): Agreement tolerance
        battery (dict): Name -> vectorized test function
        eps (float): Lattice approximation accuracy for the battery
        gridsize (int): Grid size for the battery

    Returns:
        CoincidenceReport: First disagreement or agreement with battery
    """
    notes = []
    maxdeg = testdeg
    for functional in (phi, psi):
        if isinstance(functional, MomentSequence) and functional.max_degree < maxdeg:
            notes.append(f"tested degree capped at {functional.max_degree} by available moments")
            maxdeg = functional.max_degree

    elements = algebra_elements(gens, maxdeg)
    for count, element in enumerate(elements, 1):
        a = to_float(phi.apply(element))
        b = to_float(psi.apply(element))
        if abs(a - b) > tol * max(1.0, abs(a), abs(b)):
            return CoincidenceReport(
                agree=False, tested_degree=maxdeg, checked=count, degree=element.degree,
                element=element, phi_value=a, psi_value=b, discrepancy=abs(a - b), notes=notes,
            )

    rows = []
    if isinstance(phi, QuadFunctional) and isinstance(psi, QuadFunctional):
        rows, battery_notes = _battery_discrepancies(phi, psi, gens, battery, eps, gridsize)
        notes.extend(battery_notes)
    else:
        notes.append("battery skipped: moment functionals act on polynomials only")
    worst = max((row['approximant'] for row in rows), default=0.0)
    return CoincidenceReport(
        agree=True, tested_degree=maxdeg, checked=len(elements),
        battery=rows, max_discrepancy=worst, notes=notes,
    )


def show_coincidence(report):
    """Print a coincidence report."""
    print("\n" + "="*80)
    print("COINCIDENCE OF FUNCTIONALS")
    print("="*80)
    print(f"Algebra elements compared: {report.checked} (degree <= {report.tested_degree})")
    if report.agree:
        print("✓ Functionals agree on every compared element")
        if report.battery:
            print("\n" + pd.DataFrame(report.battery).to_string(index=False))
    else:
        print(f"First disagreement at degree {report.degree}: "
              f"{report.phi_value:.12g} vs {report.psi_value:.12g} "
              f"(discrepancy {report.discrepancy:.3g})")
    for note in report.notes:
        print(f"  note: {note}")
    print("="*80 + "\n")
