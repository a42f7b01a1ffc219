"""
Determinacy diagnostics module.
Finite-level evidence for essential self-adjointness of mult_x: the Carleman
sum, the trace sum_n |p_n(i)|^2 of orthonormal polynomials at the imaginary
unit, and range-density defects of J + i*lam. None of these can prove
(in)determinacy at a finite level; verdicts are graded evidence.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import pandas as pd
from mpmath import mp

from config import RunConfig
from errors import InputValidationError, LevelError
from gns import build_gns_model
from precision import (
    FLOAT64,
    RATIONAL,
    auto_mode,
    coerce,
    extended,
    infer_mode,
    to_float,
    working_precision,
)

DETERMINATE = 'DeterminateEvidence'
INDETERMINATE = 'IndeterminateEvidence'
INCONCLUSIVE = 'Inconclusive'

MIN_DEGREE = 6
PLATEAU_WINDOW = 5


def _as_mpf(value):
    if isinstance(value, Fraction):
        return mp.mpf(value.numerator) / value.denominator
    return mp.mpf(value)


@dataclass(frozen=True)
class CarlemanResult:
    """Partial sums C_1..C_N and the divergence flag."""
    partial_sums: list
    flag: bool


def carleman_test(ms, N, slope_tol=0.05):
    """
    Partial sums C_n = sum_{k=1..n} (s_{2k}/s_0)^{-1/(2k)}.

    The divergence flag is set when the last half of the sum still adds at
    least slope_tol of its total: C_N - C_ceil(N/2) >= slope_tol * C_N.

    Args:
        ms (MomentSequence): Moments up to s_{2N} at least
        N (int): Number of terms
        slope_tol (float): Relative growth required over the last half

    Returns:
        CarlemanResult: Nondecreasing partial sums and the flag
    """
    if N < 1 or 2 * N > ms.max_degree:
        raise LevelError(N, ms.degree)
    s0 = _as_mpf(ms.moments[0])
    sums = []
    total = 0.0
    with mp.workprec(max(ms.mode.bits, 113)):
        for n in range(1, N + 1):
            s = _as_mpf(ms.moments[2 * n])
            if not s > 0:
                raise InputValidationError(
                    f"s_{2 * n} = {to_float(s)} is not positive: not a positive functional"
                )
            total += float(mp.power(s / s0, -mp.mpf(1) / (2 * n)))
            sums.append(total)
    half = sums[math.ceil(N / 2) - 1]
    flag = (sums[-1] - half) >= slope_tol * sums[-1]
    return CarlemanResult(sums, bool(flag))


def _recurrence_mode(alpha, beta):
    mode = infer_mode(list(alpha) + list(beta))
    return extended() if mode.kind == RATIONAL else mode


def pn_at_i_partial_sums(alpha, beta, N, s0=1, lam=1):
    """
    S_N = sum_{n=0..N} |p_n(i*lam)|^2 via the three-term recurrence
    beta_{n+1} p_{n+1} = (z - alpha_n) p_n - beta_n p_{n-1}, p_0 = 1/sqrt(s0).

    Args:
        alpha (list): alpha_0..alpha_{N-1}
        beta (list): beta_1..beta_N, all positive
        N (int): Last index
        s0 (number): Total mass
        lam (int): +1 or -1

    Returns:
        list: S_0..S_N as floats (nondecreasing)
    """
    if N < 0 or N > len(alpha) or N > len(beta):
        raise LevelError(N, min(len(alpha), len(beta)))
    for k, b in enumerate(beta[:N], 1):
        if not b > 0:
            raise InputValidationError(f"beta_{k} = {to_float(b)} is not positive: invalid recurrence")
    mode = _recurrence_mode(alpha[:N], beta[:N])

    with working_precision(mode):
        if mode.kind == FLOAT64:
            z = complex(0, lam)
            current = complex(1 / math.sqrt(float(s0)))
        else:
            z = mp.mpc(0, lam)
            current = mp.mpc(1) / mp.sqrt(_as_mpf(s0))
        previous = 0 * current
        total = abs(current) ** 2
        sums = [to_float(total)]
        for n in range(N):
            b_prev = beta[n - 1] if n > 0 else 0
            following = ((z - alpha[n]) * current - b_prev * previous) / beta[n]
            previous, current = current, following
            total = total + abs(current) ** 2
            sums.append(to_float(total))
    return sums


def _jacobi_block(alpha, beta, level, square):
    rows = level if square else level + 1
    block = [[0] * level for _ in range(rows)]
    for k in range(level):
        block[k][k] = alpha[k]
        if k + 1 < level:
            block[k][k + 1] = block[k + 1][k] = beta[k]
    if not square:
        block[level][level - 1] = beta[level - 1]
    return block


def range_density_defect(model, level, lam, targets=(0,), square=None, notes=None):
    """
    Distance of e_j from the range of x + i*lam restricted to span{q_0..q_{level-1}}.

    The operator maps into span{q_0..q_level}, so the (level+1) x level block
    of the Jacobi matrix is used; once the quotient is exhausted
    (level equals the rank) the block is square.

    Args:
        model (GnsModel): Model with Jacobi data
        level (int): Number of basis vectors in the domain
        lam (int): +1 or -1
        targets (tuple): Basis indices j <= level
        square (bool): Force the square block (default: only when exhausted)
        notes (list): Receives conditioning notices

    Returns:
        list: Defects in [0, 1], one per target
    """
    if lam not in (1, -1):
        raise InputValidationError(f"lambda must be +1 or -1, got {lam}")
    alpha, beta = model.recurrence()
    exhausted = model.beta_next is None and level == len(alpha)
    if square is None:
        square = exhausted
    limit = len(alpha) if square else min(len(alpha), len(beta))
    if level < 1 or level > limit:
        raise LevelError(level, limit)
    rows = level if square else level + 1
    for j in targets:
        if not 0 <= j < rows:
            raise InputValidationError(f"Target index {j} outside 0..{rows - 1}")

    block = _jacobi_block(alpha, beta, level, square)
    mode = model.mode if model.mode.kind != RATIONAL else extended()
    defects = []
    if mode.kind == FLOAT64:
        B = np.array([[float(v) for v in row] for row in block], dtype=complex)
        B[np.arange(level), np.arange(level)] += 1j * lam
        for j in targets:
            e = np.zeros(rows, dtype=complex)
            e[j] = 1.0
            u, _, rank, _ = np.linalg.lstsq(B, e, rcond=None)
            if rank < level:
                defects.append(1.0)
                if notes is not None:
                    notes.append(f"singular system at level {level}, lambda {lam}: defect set to 1")
                continue
            defects.append(float(min(1.0, max(0.0, np.linalg.norm(B @ u - e)))))
        return defects

    with working_precision(mode):
        B = mp.matrix(rows, level)
        for i in range(rows):
            for k in range(level):
                B[i, k] = mp.mpc(coerce(block[i][k], mode))
        for k in range(level):
            B[k, k] += mp.mpc(0, lam)
        # normal equations B^H B u = B^H e_j, solved by pivoted LU
        gram = B.H * B
        for j in targets:
            e = mp.matrix(rows, 1)
            e[j] = 1
            try:
                u = mp.lu_solve(gram, B.H * e)
            except (ZeroDivisionError, ValueError) as exc:
                defects.append(1.0)
                if notes is not None:
                    notes.append(f"singular system at level {level}, lambda {lam}: {exc}")
                continue
            residual = mp.norm(B * u - e)
            defects.append(float(min(1, max(0, residual))))
    return defects


@dataclass(frozen=True, eq=False)
class DeterminacyReport:
    """
    Combined determinacy evidence.

    Attributes:
        verdict (str): DeterminateEvidence, IndeterminateEvidence or Inconclusive
        carleman_partial_sums (list): C_1..C_N
        carleman_flag (bool): Divergence heuristic
        pn_at_i_partial_sums (list): S_0..S_N
        range_defects (list): (level, lambda, defect) triples for target e_0
        evidence (list): Human-readable trace of the decision
        precision (str): Precision tag of the run
        rank (int): Quotient dimension
    """
    verdict: str
    carleman_partial_sums: list = field(default_factory=list)
    carleman_flag: bool = False
    pn_at_i_partial_sums: list = field(default_factory=list)
    range_defects: list = field(default_factory=list)
    evidence: list = field(default_factory=list)
    precision: str = 'float64'
    rank: int = 0
    notes: list = field(default_factory=list)

    def defects_for(self, lam):
        return [(level, value) for level, sign, value in self.range_defects if sign == lam]

    def to_dict(self):
        return {
            'verdict': self.verdict,
            'carleman': list(self.carleman_partial_sums),
            'carleman_flag': self.carleman_flag,
            's_at_i': list(self.pn_at_i_partial_sums),
            'defects': [[level, lam, value] for level, lam, value in self.range_defects],
            'evidence': list(self.evidence),
            'precision': self.precision,
            'rank': self.rank,
            'notes': list(self.notes),
        }


def _report_mode(ms, config):
    if config.precision.kind != FLOAT64:
        return config.precision
    if ms.mode.kind != FLOAT64:
        return ms.mode
    return auto_mode(ms.moments, None, config.auto_extend)


def _plateau(sums, tol):
    if len(sums) <= PLATEAU_WINDOW:
        return False, None
    increment = (sums[-1] - sums[-1 - PLATEAU_WINDOW]) / sums[-1]
    return increment < tol, increment


def determinacy_report(ms, config=None):
    """
    Run the Carleman test, the |p_n(i)|^2 trace and the range defects for both
    signs of lambda, and grade the evidence.

    DeterminateEvidence: Carleman flag, or the trace keeps growing while the
    defects decrease below defect_threshold. IndeterminateEvidence: the trace
    plateaus and the defects of the last levels stay at or above the threshold.
    A rank-deficient Hankel matrix (finitely atomic functional) is determinate.

    Args:
        ms (MomentSequence): Moments s_0..s_{2d}
        config (RunConfig): Tolerances and precision (default RunConfig())

    Returns:
        DeterminacyReport: Verdict with all sub-traces
    """
    config = config or RunConfig()
    mode = _report_mode(ms, config)
    if ms.degree < MIN_DEGREE:
        return DeterminacyReport(
            INCONCLUSIVE,
            evidence=[f"insufficient moments: degree {ms.degree} < {MIN_DEGREE}"],
            precision=mode.tag,
        )

    normalized = ms.with_mode(mode).normalized()
    model = build_gns_model(normalized, config.tol('psd_tol'))
    notes = list(model.notes)
    evidence = []

    atomic = model.rank < normalized.degree + 1
    try:
        carleman = carleman_test(normalized, normalized.degree, config.tol('carleman_slope_tol'))
        evidence.append(
            f"Carleman C_{normalized.degree} = {carleman.partial_sums[-1]:.6g}, "
            f"divergence flag {'set' if carleman.flag else 'unset'}"
        )
    except InputValidationError as exc:
        # a vanishing even moment only occurs for the point mass at 0
        if not atomic:
            raise
        carleman = CarlemanResult([], False)
        notes.append(f"Carleman sum skipped: {exc}")

    alpha, beta = model.recurrence()
    N = min(len(alpha), len(beta))
    s_at_i = pn_at_i_partial_sums(alpha, beta, N)

    defects = []
    levels = list(range(1, N + 1))
    if model.beta_next is None and len(alpha) > N:
        levels.append(len(alpha))
    for level in levels:
        for lam in (1, -1):
            value = range_density_defect(model, level, lam, notes=notes)[0]
            defects.append((level, lam, value))

    threshold = config.tol('defect_threshold')
    plateau, increment = _plateau(s_at_i, config.tol('plateau_tol'))
    plus = [value for level, lam, value in defects if lam == 1]
    if increment is not None:
        evidence.append(
            f"S_{N} = {s_at_i[-1]:.6g}, relative increment over last {PLATEAU_WINDOW} levels "
            f"{increment:.3g} ({'plateau' if plateau else 'growing'})"
        )
    if plus:
        evidence.append(f"range defect at level {levels[-1]}: {plus[-1]:.4g} (threshold {threshold})")

    if atomic:
        verdict = DETERMINATE
        evidence.append(f"finitely atomic: Hankel rank {model.rank} < {normalized.degree + 1}")
    else:
        decreasing = all(b <= a + 1e-12 for a, b in zip(plus, plus[1:]))
        tail = [value for level, lam, value in defects if level > levels[-1] - PLATEAU_WINDOW]
        if carleman.flag or (not plateau and decreasing and plus and plus[-1] < threshold):
            verdict = DETERMINATE
        elif plateau and len(plus) >= PLATEAU_WINDOW and all(v >= threshold for v in tail):
            verdict = INDETERMINATE
        else:
            verdict = INCONCLUSIVE

    return DeterminacyReport(
        verdict=verdict,
        carleman_partial_sums=carleman.partial_sums,
        carleman_flag=carleman.flag,
        pn_at_i_partial_sums=s_at_i,
        range_defects=defects,
        evidence=evidence,
        precision=mode.tag,
        rank=model.rank,
        notes=notes,
    )


def show_determinacy(report, max_rows=25):
    """Print the traces and the verdict of a determinacy report."""
    print("\n" + "="*80)
    print("DETERMINACY REPORT")
    print("="*80)
    print(f"Precision: {report.precision}")
    print(f"Rank:      {report.rank}")
    plus = dict(report.defects_for(1))
    minus = dict(report.defects_for(-1))
    rows = []
    for n, s in enumerate(report.pn_at_i_partial_sums[:max_rows]):
        rows.append({
            'n': n,
            'carleman_C_n': report.carleman_partial_sums[n - 1] if 0 < n <= len(report.carleman_partial_sums) else np.nan,
            'S_n': s,
            'defect(+1)': plus.get(n, np.nan),
            'defect(-1)': minus.get(n, np.nan),
        })
    if rows:
        print("\n" + pd.DataFrame(rows).to_string(index=False))
    print("-"*80)
    for line in report.evidence:
        print(f"  {line}")
    for note in report.notes:
        print(f"  note: {note}")
    print(f"\nVerdict: {report.verdict}")
    print("="*80 + "\n")
