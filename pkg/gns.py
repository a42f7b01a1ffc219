"""
GNS construction module.
Hankel Gram matrix of a moment functional, its Gel'fand-ideal quotient,
orthonormal polynomials, the Jacobi (multiplication) operator and the
seminorm machinery on the quotient.
"""
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd
from mpmath import mp
from scipy.linalg import LinAlgError, eigh_tridiagonal

from errors import EigenSolverError, InputValidationError, LevelError, NotPsdError
from poly import Polynomial, arith
from precision import (
    EXTENDED,
    FLOAT64,
    RATIONAL,
    coerce,
    extended,
    infer_mode,
    sqrt,
    to_float,
    to_matrix,
    working_precision,
    zero,
    zeros,
)

PSD_TOL = 1e-10
CS_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class HankelMatrix:
    """
    Gram matrix of the monomials 1, x, ..., x^d: H[i][j] = s_{i+j}.

    Attributes:
        entries (np.ndarray): (d+1)x(d+1) matrix (object dtype outside float64)
        mode (NumericMode): Scalar type of the entries
    """
    entries: np.ndarray
    mode: object

    @property
    def size(self):
        return self.entries.shape[0]

    def __getitem__(self, index):
        return self.entries[index]

    def perturbed(self, i, delta):
        """Copy with delta added to the diagonal entry (i, i)."""
        entries = self.entries.copy()
        with working_precision(self.mode):
            entries[i, i] = entries[i, i] + coerce(delta, self.mode)
        return HankelMatrix(entries, self.mode)

    def to_list(self):
        return [[to_float(v) for v in row] for row in self.entries]


def hankel(ms):
    """Hankel matrix H[i][j] = s_{i+j}, 0 <= i, j <= d."""
    d = ms.degree
    rows = [[ms.moments[i + j] for j in range(d + 1)] for i in range(d + 1)]
    return HankelMatrix(to_matrix(rows, ms.mode), ms.mode)


def hankel_from_entries(rows, mode=None):
    """HankelMatrix wrapper for an explicit symmetric matrix (used for perturbed inputs)."""
    flat = [v for row in rows for v in row]
    mode = mode or infer_mode(flat)
    return HankelMatrix(to_matrix(rows, mode), mode)


@dataclass(frozen=True, eq=False)
class PsdResult:
    """
    Outcome of the pivoted factorization of a Hankel matrix.

    Attributes:
        psd (bool): No remaining pivot below -tol
        rank (int): Number of accepted pivots
        kernel_basis (list): Polynomials spanning the numerical null space
        pivots (list): Accepted equilibrated pivots in elimination order
        order (list): Monomial indices in pivot order
        failing_pivot (int): Monomial index of the offending pivot when not PSD
    """
    psd: bool
    rank: int
    kernel_basis: list
    pivots: list
    order: list
    failing_pivot: int = None

    @property
    def kernel_dim(self):
        return len(self.kernel_basis)

    def to_dict(self):
        return {
            'psd': self.psd,
            'rank': self.rank,
            'kernel_dim': self.kernel_dim,
            'kernel_basis': [list(p.coeffs) for p in self.kernel_basis],
            'failing_pivot': self.failing_pivot,
        }


def _equilibration(H, tol):
    """Diagonal scaling to unit diagonal; vanishing diagonal entries are scaled by the largest one."""
    mode = H.mode
    n = H.size
    if mode.kind == RATIONAL:
        return [coerce(1, mode)] * n
    diagonal = [H[i, i] for i in range(n)]
    largest = max(abs(v) for v in diagonal)
    if largest == 0:
        return [coerce(1, mode)] * n
    scales = []
    for v in diagonal:
        reference = v if v > 0 else largest
        scales.append(1 / sqrt(reference, mode))
    return scales


def psd_rank(H, tol=PSD_TOL):
    """
    Pivoted LDL^T factorization of the equilibrated Hankel matrix.

    A pivot is accepted while the largest remaining diagonal exceeds tol; the
    factorization then stops and the remaining Schur complement decides
    positivity. Rational mode uses exact zero tests instead of tol.

    Args:
        H (HankelMatrix): Symmetric matrix
        tol (float): Rank threshold on the equilibrated matrix (tol > 0)

    Returns:
        PsdResult: psd flag, rank, kernel basis (truncated Gel'fand ideal)
    """
    if not tol > 0:
        raise InputValidationError(f"tol must be positive, got {tol}")
    mode = H.mode
    exact = mode.kind == RATIONAL
    threshold = 0 if exact else tol
    n = H.size

    with working_precision(mode):
        scales = _equilibration(H, tol)
        S = [[H[i, j] * scales[i] * scales[j] for j in range(n)] for i in range(n)]
        perm = list(range(n))
        L = [[zero(mode)] * n for _ in range(n)]
        pivots = []

        rank = 0
        for k in range(n):
            p = max(range(k, n), key=lambda i: S[i][i])
            if not S[p][p] > threshold:
                break
            if p != k:
                S[k], S[p] = S[p], S[k]
                for row in S:
                    row[k], row[p] = row[p], row[k]
                L[k], L[p] = L[p], L[k]
                perm[k], perm[p] = perm[p], perm[k]
            pivot = S[k][k]
            pivots.append(pivot)
            for i in range(k + 1, n):
                L[i][k] = S[i][k] / pivot
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    S[i][j] = S[i][j] - L[i][k] * S[k][j]
            rank += 1

        failing = None
        worst = None
        for i in range(rank, n):
            if S[i][i] < -threshold and (worst is None or S[i][i] < worst):
                failing, worst = perm[i], S[i][i]
        if failing is None:
            for i in range(rank, n):
                for j in range(rank, n):
                    if i != j and abs(S[i][j]) > threshold:
                        failing = perm[i]
                        break
                if failing is not None:
                    break
        psd = failing is None

        kernel = []
        if psd:
            for c in range(rank, n):
                # solve L11^T y = -L21^T e_c by back substitution
                y = [zero(mode)] * rank
                for i in reversed(range(rank)):
                    acc = -L[c][i]
                    for j in range(i + 1, rank):
                        acc = acc - L[j][i] * y[j]
                    y[i] = acc
                coeffs = [zero(mode)] * n
                for i in range(rank):
                    coeffs[perm[i]] = y[i] * scales[perm[i]]
                coeffs[perm[c]] = scales[perm[c]]
                kernel.append(Polynomial(tuple(coeffs), mode))

    return PsdResult(psd, rank, kernel, pivots, perm[:rank], failing)


@dataclass(frozen=True, eq=False)
class GnsModel:
    """
    Finite-level GNS data of a moment functional.

    Attributes:
        rank (int): Dimension of the truncated quotient by the Gel'fand ideal
        onb (np.ndarray): rank x (d+1) coefficients of q_0..q_{rank-1}
        accepted (tuple): Monomial index carrying the leading term of each q_k
        jacobi_alpha (list): alpha_0..alpha_{m-1}
        jacobi_beta (list): beta_1..beta_{m-1}
        beta_next (object): beta_m when the quotient extends past level m, else None
        multmat (np.ndarray): m x m matrix of mult_x on span{q_0..q_{m-1}}
        mode (NumericMode): Working precision of the entries
        kernel_dim (int): Dimension of the discovered null space
        notes (list): Truncation and rank-deficiency notices
    """
    rank: int
    onb: np.ndarray
    accepted: tuple
    mode: object
    jacobi_alpha: list = field(default_factory=list)
    jacobi_beta: list = field(default_factory=list)
    beta_next: object = None
    multmat: np.ndarray = None
    kernel_dim: int = 0
    s0: object = 1
    notes: list = field(default_factory=list)

    @property
    def size(self):
        return self.onb.shape[1]

    def polynomial(self, k):
        """q_k as a Polynomial."""
        return Polynomial(tuple(self.onb[k]), self.mode)

    def degrees(self):
        return list(self.accepted)

    def recurrence(self):
        """alpha_0..alpha_{m-1} and beta_1..beta_m (beta_m only when available)."""
        beta = list(self.jacobi_beta)
        if self.beta_next is not None:
            beta.append(self.beta_next)
        return list(self.jacobi_alpha), beta

    def to_dict(self):
        return {
            'rank': self.rank,
            'alpha': list(self.jacobi_alpha),
            'beta': list(self.jacobi_beta),
            'beta_next': self.beta_next,
            'psd': True,
            'kernel_dim': self.kernel_dim,
            'onb': [list(row) for row in self.onb],
            'notes': list(self.notes),
        }


def orthonormalize(H, tol=PSD_TOL):
    """
    Degree-graded orthonormal polynomials of the Hankel inner product.

    Monomials are processed in degree order; a monomial whose projection
    residual falls below tol (relative to its diagonal entry) lies in the
    span of the lower ones modulo the Gel'fand ideal and is skipped.
    Rational input is orthonormalized in extended precision.

    Args:
        H (HankelMatrix): PSD Hankel matrix
        tol (float): Relative pivot threshold

    Returns:
        GnsModel: onb and rank populated

    Raises:
        NotPsdError: On a pivot below -tol, with the monomial index
    """
    mode = H.mode
    if mode.kind == RATIONAL:
        mode = extended()
        H = HankelMatrix(to_matrix(H.entries, mode), mode)
    n = H.size

    with working_precision(mode):
        largest = max(abs(H[i, i]) for i in range(n))
        accepted = []
        R = []  # R[a][b]: upper-triangular factor, H_AA = R^T R
        for k in range(n):
            r = []
            for a in range(len(accepted)):
                acc = H[accepted[a], k]
                for b in range(a):
                    acc = acc - R[b][a] * r[b]
                r.append(acc / R[a][a])
            pivot = H[k, k] - sum((v * v for v in r), zero(mode))
            reference = H[k, k] if H[k, k] > 0 else largest
            if largest == 0 or pivot < -tol * reference:
                raise NotPsdError(k, to_float(pivot))
            if pivot > tol * reference:
                column = len(accepted)
                for a in range(column):
                    R[a].append(r[a])
                R.append([zero(mode)] * column + [sqrt(pivot, mode)])
                accepted.append(k)

        rank = len(accepted)
        # Q = R^{-T}: lower triangular, row k expresses q_k in accepted monomials
        Q = [[zero(mode)] * rank for _ in range(rank)]
        for k in range(rank):
            Q[k][k] = 1 / R[k][k]
            for j in range(k):
                acc = zero(mode)
                for b in range(j, k):
                    acc = acc - R[b][k] * Q[b][j]
                Q[k][j] = acc / R[k][k]
        onb = zeros((rank, n), mode)
        for k in range(rank):
            for j in range(k + 1):
                onb[k, accepted[j]] = Q[k][j]

    notes = []
    if rank < n:
        notes.append(f"quotient dimension {rank} < {n}: monomials {sorted(set(range(n)) - set(accepted))} "
                     f"lie in the Gel'fand ideal modulo lower degrees")
    return GnsModel(rank=rank, onb=onb, accepted=tuple(accepted), mode=mode,
                    kernel_dim=n - rank, s0=H[0, 0], notes=notes)


@dataclass(frozen=True, eq=False)
class JacobiData:
    """Three-term recurrence data; unpacks as (alpha, beta)."""
    alpha: list
    beta: list
    beta_next: object
    multmat: np.ndarray
    notes: list = field(default_factory=list)

    def __iter__(self):
        return iter((self.alpha, self.beta))


def jacobi_from_onb(model, ms):
    """
    Recurrence coefficients alpha_k = <q_k, x q_k>, beta_k = <q_{k-1}, x q_k>.

    Only the orthonormal polynomials of degree <= d-1 enter the Jacobi block,
    since x q_k must stay within the available moments.

    Returns:
        JacobiData: alpha, beta (m x m Jacobi block), beta_next and multmat
    """
    mode = model.mode
    d = ms.degree
    m = sum(1 for degree in model.accepted if degree <= d - 1)
    notes = list(model.notes)
    if model.rank < d + 1:
        notes.append(f"rank deficient: Jacobi data truncated to the {m}-dimensional quotient")

    with working_precision(mode):
        s = [coerce(v, mode) for v in ms.moments]
        shifted = [[s[i + j + 1] for j in range(d + 1)] for i in range(d)]
        A = [[model.onb[k, j] for j in range(d)] for k in range(m)]
        # x q_j in the monomial Gram pairing: (H1 A^T)[i][j]
        xq = [[sum((shifted[i][l] * A[j][l] for l in range(d)), zero(mode)) for j in range(m)]
              for i in range(d)]
        M = zeros((m, m), mode)
        for a in range(m):
            for b in range(m):
                M[a, b] = sum((A[a][i] * xq[i][b] for i in range(d)), zero(mode))
        alpha = [M[k, k] for k in range(m)]
        beta = [M[k, k + 1] for k in range(m - 1)]

        beta_next = None
        if model.rank > m and m > 0:
            following = [model.onb[m, j] for j in range(d + 1)]
            beta_next = sum(
                (A[m - 1][i] * shifted[i][j] * following[j] for i in range(d) for j in range(d + 1)),
                zero(mode),
            )

    return JacobiData(alpha, beta, beta_next, M, notes)


def build_gns_model(ms, tol=PSD_TOL):
    """Hankel, PSD screen, orthonormal basis and Jacobi data in one call."""
    H = hankel(ms)
    screen = psd_rank(H, tol)
    if not screen.psd:
        raise NotPsdError(screen.failing_pivot)
    model = orthonormalize(H, tol)
    jacobi = jacobi_from_onb(model, ms)
    return replace(
        model,
        jacobi_alpha=jacobi.alpha,
        jacobi_beta=jacobi.beta,
        beta_next=jacobi.beta_next,
        multmat=jacobi.multmat,
        notes=list(model.notes) + list(jacobi.notes),
    )


def mult_operator_matrix(model, level):
    """
    Leading level x level block of the Jacobi matrix of mult_x.

    Raises:
        LevelError: If level exceeds the available Jacobi block
    """
    available = len(model.jacobi_alpha)
    if level < 1 or level > available:
        raise LevelError(level, available)
    return model.multmat[:level, :level]


@dataclass(frozen=True)
class CauchySchwarz:
    normf: object
    normg: object
    inner: object
    cs_slack: object

    def to_dict(self):
        return {k: to_float(v) for k, v in self.__dict__.items()}


def seminorm_and_cs(phi, f, g):
    """
    Seminorms ||f||, ||g||, inner product <f, g> = phi(f g) and the
    Cauchy-Schwarz slack ||f|| ||g|| - |<f, g>|.

    Squared norms are clamped at 0 against rounding.
    """
    mode = getattr(phi, 'mode', None) or infer_mode([])
    with working_precision(mode):
        ff = coerce(phi.apply(arith('mul', f, f)), mode)
        gg = coerce(phi.apply(arith('mul', g, g)), mode)
        fg = coerce(phi.apply(arith('mul', f, g)), mode)
        normf = sqrt(max(ff, zero(mode)), mode)
        normg = sqrt(max(gg, zero(mode)), mode)
        slack = normf * normg - abs(fg)
    return CauchySchwarz(normf, normg, fg, slack)


@dataclass(frozen=True)
class ResolventCheck:
    lhs: float
    rhs: float
    passed: bool

    def to_dict(self):
        return {'lhs': self.lhs, 'rhs': self.rhs, 'pass': self.passed}


def _node_values(fn, nodes):
    if callable(fn):
        return np.asarray(fn(nodes))
    return np.asarray(fn)


def resolvent_contraction_check(q, f, g, lam):
    """
    Compare ||(f + i lam)^{-1} g|| with ||g|| in the seminorm of a quadrature.

    Args:
        q (QuadFunctional): Positive functional
        f (SampledFunction or callable): Real-valued Hermitian element
        g (SampledFunction or callable): Possibly complex element
        lam (int): +1 or -1

    Returns:
        ResolventCheck: lhs, rhs and whether lhs <= rhs (1 + 1e-12)
    """
    if lam not in (1, -1):
        raise InputValidationError(f"lam must be +1 or -1, got {lam}")
    fv = _node_values(f, q.nodes)
    if np.iscomplexobj(fv):
        if np.any(np.abs(fv.imag) > 0):
            raise InputValidationError("f must be real-valued on the quadrature nodes")
        fv = fv.real
    gv = _node_values(g, q.nodes)
    weight = np.abs(gv) ** 2
    lhs = float(np.sqrt(np.sum(q.weights * weight / (fv ** 2 + lam * lam))))
    rhs = float(np.sqrt(np.sum(q.weights * weight)))
    return ResolventCheck(lhs, rhs, lhs <= rhs * (1 + CS_TOL))


@dataclass(frozen=True, eq=False)
class GaussRule:
    """m-point Gauss rule of a Jacobi block: nodes and positive weights."""
    nodes: list
    weights: list
    mode: object = None

    def apply(self, p):
        with working_precision(self.mode):
            return sum((w * p(x) for x, w in zip(self.nodes, self.weights)), 0 * self.weights[0])

    def moments(self, count):
        with working_precision(self.mode):
            return [sum((w * x ** k for x, w in zip(self.nodes, self.weights)), 0 * self.weights[0])
                    for k in range(count)]

    def to_dict(self):
        return {'nodes': list(self.nodes), 'weights': list(self.weights)}


def gauss_quadrature(alpha, beta, m, s0=1, mode=None):
    """
    Golub-Welsch: nodes are the eigenvalues of the m x m Jacobi block and
    weights are s0 times the squared first eigenvector components.

    Args:
        alpha (list): Diagonal alpha_0..
        beta (list): Off-diagonal beta_1.. (positive)
        m (int): Number of nodes
        s0 (number): Total mass
        mode (NumericMode): Precision (inferred from alpha when None)

    Returns:
        GaussRule: Nodes in increasing order with their weights
    """
    if m < 1 or m > len(alpha) or m - 1 > len(beta):
        raise LevelError(m, min(len(alpha), len(beta) + 1))
    for k, b in enumerate(beta[:m - 1], 1):
        if not b > 0:
            raise InputValidationError(f"beta_{k} = {b} is not positive")
    mode = mode or infer_mode(alpha)
    if mode.kind == RATIONAL:
        mode = extended()

    if m == 1:
        with working_precision(mode):
            return GaussRule([coerce(alpha[0], mode)], [coerce(s0, mode)], mode)

    if mode.kind == FLOAT64:
        try:
            nodes, vectors = eigh_tridiagonal(
                np.array([float(a) for a in alpha[:m]]), np.array([float(b) for b in beta[:m - 1]])
            )
        except (LinAlgError, ValueError) as exc:
            raise EigenSolverError(f"Tridiagonal eigensolver failed: {exc}") from exc
        order = np.argsort(nodes)
        weights = float(s0) * vectors[0, order] ** 2
        return GaussRule(list(nodes[order]), list(weights), mode)

    with working_precision(mode):
        J = mp.zeros(m, m)
        for k in range(m):
            J[k, k] = coerce(alpha[k], mode)
        for k in range(m - 1):
            J[k, k + 1] = J[k + 1, k] = coerce(beta[k], mode)
        try:
            eigenvalues, vectors = mp.eigsy(J)
        except Exception as exc:
            raise EigenSolverError(f"Extended-precision eigensolver failed: {exc}") from exc
        mass = coerce(s0, mode)
        pairs = sorted(
            ((eigenvalues[k], mass * vectors[0, k] ** 2) for k in range(m)), key=lambda pair: pair[0]
        )
    return GaussRule([x for x, _ in pairs], [w for _, w in pairs], mode)


def show_gns_model(model, max_rows=12):
    """Print rank, recurrence coefficients and notices of a GNS model."""
    print("\n" + "="*80)
    print("GNS MODEL")
    print("="*80)
    print(f"Precision:          {model.mode.tag}")
    print(f"Quotient dimension: {model.rank} (kernel dimension {model.kernel_dim})")
    alpha, beta = model.recurrence()
    rows = [
        {'k': k, 'alpha_k': to_float(alpha[k]), 'beta_k+1': to_float(beta[k]) if k < len(beta) else np.nan}
        for k in range(min(len(alpha), max_rows))
    ]
    if rows:
        print("\n" + pd.DataFrame(rows).to_string(index=False))
    for note in model.notes:
        print(f"  note: {note}")
    print("="*80 + "\n")


def show_psd(result):
    """Print the PSD screen of a Hankel matrix."""
    print("\n" + "="*80)
    print("HANKEL PSD SCREEN")
    print("="*80)
    print(f"PSD:         {result.psd}")
    print(f"Rank:        {result.rank}")
    print(f"Kernel dim:  {result.kernel_dim}")
    if not result.psd:
        print(f"Failing pivot at monomial index {result.failing_pivot}")
    print("="*80 + "\n")
