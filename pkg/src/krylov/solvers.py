"""Linear-system solvers on top of the Lanczos recurrence: CG (tridiagonal
and low-memory backends), MINRES, multi-shift variants, preconditioned
wrapping, a priori Chebyshev bounds, a posteriori error estimates, and
block CG.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    ExtendedTridiagonal,
    LinearOperator,
    SymTridiagonal,
    tridiag_solve,
)
from .errors import (
    InsufficientIterates,
    InvalidInterval,
    SingularPivot,
    SingularSystem,
    ZeroStartVector,
)
from .lanczos import ReorthMode, block_lanczos, lanczos

__all__ = [
    "IterateHistory",
    "BlockIterateHistory",
    "ShiftFamily",
    "cg",
    "minres",
    "multi_shift_solve",
    "preconditioned_solve",
    "chebyshev_bound",
    "error_estimate_delay",
    "block_cg",
]

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class IterateHistory:
    """Per-iteration solver output.

    ``iterates[j]`` is the iterate after j+1 steps (``None`` where the
    small solve was singular, or when retention is off).  Residual norms
    are explicitly recomputed as ``||b - A x||`` (NaN at gaps).
    """

    iterates: list
    residual_norms: np.ndarray
    termination: str  # "max_iter", "converged", or "singular_pivot"
    b_norm: float
    directions: list | None = None  # LowMemory CG search directions

    @property
    def k(self) -> int:
        return len(self.iterates)

    @property
    def final(self) -> np.ndarray:
        """Last successfully computed iterate."""
        for x in reversed(self.iterates):
            if x is not None:
                return x
        raise InsufficientIterates("no successful iterate in history")


@dataclass(frozen=True)
class BlockIterateHistory:
    """Block solver output: per-step iterate matrices and column residuals."""

    iterates: list  # list of d x m matrices (or None)
    residual_norms: np.ndarray  # k x m columnwise ||B_j - A X_j||
    termination: str
    deflation_widths: list


@dataclass(frozen=True)
class ShiftFamily:
    """Shifts and weights of a rational approximation sum w_i/(x - z_i)."""

    shifts: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        shifts = np.asarray(self.shifts, dtype=complex).ravel()
        weights = np.asarray(self.weights, dtype=complex).ravel()
        if shifts.shape != weights.shape:
            raise ValueError("shifts and weights must have matching length")
        if np.unique(shifts).size != shifts.size:
            raise ValueError("shifts must be distinct")
        object.__setattr__(self, "shifts", shifts)
        object.__setattr__(self, "weights", weights)


def _residual_norm(A: LinearOperator, b: np.ndarray, x: np.ndarray, shift=0.0):
    """Explicitly recomputed residual norm for (A - shift I) x = b."""
    x = np.asarray(x)
    if np.iscomplexobj(x):
        Ax = np.asarray(A.apply(x.real), dtype=complex) + 1j * A.apply(x.imag)
    else:
        Ax = A.apply(x)
    r = b - (Ax - shift * x)
    return float(np.linalg.norm(r))


def _cg_tridiagonal(A, b, k, mode, tol, keep_iterates):
    dec = lanczos(A, b, k, mode=mode)
    Q, T, b_norm = dec.basis, dec.T, dec.b_norm
    iterates, res = [], []
    termination = "max_iter"
    for j in range(1, T.size + 1):
        Tj = T.principal(j)
        e1 = np.zeros(j)
        e1[0] = b_norm
        try:
            y = tridiag_solve(Tj, e1)
        except SingularSystem:
            iterates.append(None)
            res.append(np.nan)
            continue
        x = Q[:, :j] @ np.real(y)
        rnorm = _residual_norm(A, b, x)
        iterates.append(x if keep_iterates else None)
        res.append(rnorm)
        if rnorm <= tol * b_norm:
            termination = "converged"
            break
    return IterateHistory(
        iterates=iterates,
        residual_norms=np.asarray(res),
        termination=termination,
        b_norm=b_norm,
    )


def _cg_low_memory(A, b, k, mode, tol, keep_iterates, keep_directions):
    """CG by the bidiagonal inverse-Cholesky update of the Lanczos
    recurrence: keeps only the two latest Lanczos vectors, the latest
    search direction, and the running iterate."""
    b = np.asarray(b, dtype=float)
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        raise ZeroStartVector("starting vector has zero norm")

    d = A.dim
    q_prev = np.zeros(d)
    q = b / b_norm
    beta_prev = 0.0
    x = np.zeros(d)
    p_prev = np.zeros(d)
    m_prev = 0.0
    stored = [q] if mode is ReorthMode.FULL else None

    iterates, res, dirs = [], [], []
    termination = "max_iter"
    for n in range(k):
        y = A.apply(q) - beta_prev * q_prev
        alpha = float(q @ y)
        z = y - alpha * q
        if mode is ReorthMode.FULL:
            Qm = np.stack(stored, axis=1)
            for _ in range(2):
                z = z - Qm @ (Qm.T @ z)
        beta = float(np.linalg.norm(z))

        # Cholesky update of T_n = L L^T: pivot must stay positive.
        pivot = alpha - m_prev**2
        if pivot <= 0.0:
            termination = "singular_pivot"
            break
        l = math.sqrt(pivot)
        p = (q - m_prev * p_prev) / l
        x = x + float(p @ b) * p

        rnorm = _residual_norm(A, b, x)
        iterates.append(x.copy() if keep_iterates else None)
        res.append(rnorm)
        if keep_directions:
            dirs.append(p.copy())
        if rnorm <= tol * b_norm:
            termination = "converged"
            break
        if beta <= 1e-12 * max(abs(alpha), beta_prev, 1e-300):
            break

        m_prev = beta / l
        p_prev = p
        q_prev = q
        beta_prev = beta
        q = z / beta
        if mode is ReorthMode.FULL:
            stored.append(q)

    return IterateHistory(
        iterates=iterates,
        residual_norms=np.asarray(res),
        termination=termination,
        b_norm=b_norm,
        directions=dirs if keep_directions else None,
    )


def cg(
    A: LinearOperator,
    b: np.ndarray,
    k: int,
    backend: str = "tridiagonal",
    mode: ReorthMode = ReorthMode.FULL,
    tol: float = DEFAULT_TOL,
    keep_iterates: bool = True,
    keep_directions: bool = False,
) -> IterateHistory:
    """Conjugate gradient.

    ``backend="tridiagonal"`` computes each iterate directly from a
    stored Lanczos decomposition (the small solve is redone per step);
    a near-singular small system is recorded as a gap (NaN residual) so
    indefinite problems still produce a full trace.  ``backend="low_memory"``
    maintains only a constant number of length-d vectors via the
    inverse-Cholesky update and stops at the first nonpositive pivot.
    """
    if backend == "tridiagonal":
        return _cg_tridiagonal(A, b, k, mode, tol, keep_iterates)
    if backend == "low_memory":
        return _cg_low_memory(A, b, k, mode, tol, keep_iterates, keep_directions)
    raise ValueError(f"unknown backend {backend!r}")


def minres(
    A: LinearOperator,
    b: np.ndarray,
    k: int,
    mode: ReorthMode = ReorthMode.FULL,
    tol: float = DEFAULT_TOL,
    keep_iterates: bool = True,
) -> IterateHistory:
    """MINRES: per step, the minimum-residual iterate over the Krylov
    space, obtained from a small least-squares solve on the extended
    tridiagonal matrix."""
    dec = lanczos(A, b, k, mode=mode)
    Q, T, b_norm = dec.basis, dec.T, dec.b_norm
    betas_ext = np.concatenate((T.betas, [dec.trailing_beta]))
    iterates, res = [], []
    termination = "max_iter"
    for j in range(1, T.size + 1):
        Tj = ExtendedTridiagonal(T.principal(j), float(betas_ext[j - 1]))
        rhs = np.zeros(j + 1)
        rhs[0] = b_norm
        y = np.real(tridiag_solve(Tj, rhs))
        x = Q[:, :j] @ y
        rnorm = _residual_norm(A, b, x)
        iterates.append(x if keep_iterates else None)
        res.append(rnorm)
        if rnorm <= tol * b_norm:
            termination = "converged"
            break
    return IterateHistory(
        iterates=iterates,
        residual_norms=np.asarray(res),
        termination=termination,
        b_norm=b_norm,
    )


def multi_shift_solve(
    A: LinearOperator,
    b: np.ndarray,
    shifts,
    k: int,
    method: str = "cg",
    mode: ReorthMode = ReorthMode.FULL,
    keep_iterates: bool = True,
) -> list:
    """Solve (A - z_i I) x = b for every shift from one shared Lanczos run.

    Shift invariance of Krylov subspaces makes the per-shift iterate equal
    to the single-shift solver's: only the small tridiagonal solves see
    the shift.  Returns one :class:`IterateHistory` per shift.
    """
    shifts = np.asarray(shifts).ravel()
    dec = lanczos(A, b, k, mode=mode)
    Q, T, b_norm = dec.basis, dec.T, dec.b_norm
    betas_ext = np.concatenate((T.betas, [dec.trailing_beta]))

    histories = []
    for z in shifts:
        z = complex(z)
        zval = z if z.imag != 0.0 else z.real
        iterates, res = [], []
        termination = "max_iter"
        for j in range(1, T.size + 1):
            try:
                if method == "cg":
                    e1 = np.zeros(j)
                    e1[0] = b_norm
                    y = tridiag_solve(T.principal(j), e1, shift=zval)
                elif method == "minres":
                    Tj = ExtendedTridiagonal(
                        T.principal(j), float(betas_ext[j - 1])
                    )
                    rhs = np.zeros(j + 1)
                    rhs[0] = b_norm
                    y = tridiag_solve(Tj, rhs, shift=zval)
                else:
                    raise ValueError(f"unknown method {method!r}")
            except SingularSystem:
                iterates.append(None)
                res.append(np.nan)
                continue
            x = Q[:, :j] @ y
            if z.imag == 0.0:
                x = np.real(x)
            iterates.append(x if keep_iterates else None)
            res.append(_residual_norm(A, b, x, shift=z))
        histories.append(
            IterateHistory(
                iterates=iterates,
                residual_norms=np.asarray(res),
                termination=termination,
                b_norm=b_norm,
            )
        )
    return histories


def preconditioned_solve(
    A: LinearOperator,
    M: LinearOperator,
    b: np.ndarray,
    k: int,
    method: str = "cg",
    mode: ReorthMode = ReorthMode.FULL,
) -> IterateHistory:
    """Solve A x = b through the symmetric wrapping M A M y = M b,
    x = M y, for a symmetric preconditioning operator M.

    Returned residual norms are recomputed for the *original* system.
    """
    b = np.asarray(b, dtype=float)
    wrapped = LinearOperator(A.dim, lambda v: M.apply(A.apply(M.apply(v))))
    rhs = M.apply(b)
    if method == "cg":
        inner = cg(wrapped, rhs, k, mode=mode)
    elif method == "minres":
        inner = minres(wrapped, rhs, k, mode=mode)
    else:
        raise ValueError(f"unknown method {method!r}")
    iterates = [None if y is None else M.apply(y) for y in inner.iterates]
    res = np.asarray(
        [np.nan if x is None else _residual_norm(A, b, x) for x in iterates]
    )
    return IterateHistory(
        iterates=iterates,
        residual_norms=res,
        termination=inner.termination,
        b_norm=float(np.linalg.norm(b)),
    )


def chebyshev_bound(kind: str, params: dict, k: int) -> float:
    """A priori Chebyshev convergence bounds for CG's A-norm error ratio.

    - ``full_interval``: the sharp two-term Chebyshev value on
      [lam_min, lam_max] (not the exponential upper estimate).
    - ``top_cluster``: after placing a root at each of the ell outlying
      top eigenvalues, the exponential bound with degree k - ell on
      [lam_min, lam_next].
    - ``two_interval``: the symmetric two-interval exponential bound for
      intervals [a, b] union [c, d] of equal width with b < 0 < c.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if kind == "full_interval":
        lmin, lmax = params["lam_min"], params["lam_max"]
        if not 0 < lmin <= lmax:
            raise InvalidInterval("need 0 < lam_min <= lam_max")
        if lmin == lmax:
            return 0.0 if k >= 1 else 1.0
        kappa = lmax / lmin
        r = (math.sqrt(kappa) + 1.0) / (math.sqrt(kappa) - 1.0)
        return 2.0 / (r**k + r**-k)
    if kind == "top_cluster":
        lmin, lnext, ell = params["lam_min"], params["lam_next"], params["ell"]
        if not 0 < lmin <= lnext:
            raise InvalidInterval("need 0 < lam_min <= lam_next")
        if k <= ell:
            return 1.0
        return 2.0 * math.exp(-2.0 * (k - ell) / math.sqrt(lnext / lmin))
    if kind == "two_interval":
        a, b_, c, d = params["a"], params["b"], params["c"], params["d"]
        if not (a <= b_ < 0.0 < c <= d):
            raise InvalidInterval("need a <= b < 0 < c <= d")
        if abs((b_ - a) - (d - c)) > 1e-10 * max(abs(a), abs(d)):
            raise InvalidInterval("intervals must have equal width")
        return 2.0 * math.exp(-2.0 * (k // 2) / math.sqrt(abs(a * d) / abs(b_ * c)))
    raise ValueError(f"unknown bound kind {kind!r}")


def error_estimate_delay(
    history: IterateHistory, A: LinearOperator, d: int
) -> np.ndarray:
    """A posteriori CG error estimate by lookahead: estimate[j] =
    ||x_{j+d} - x_j||_A, a guaranteed lower bound on the A-norm error at
    step j in exact arithmetic."""
    xs = history.iterates
    if any(x is None for x in xs):
        raise InsufficientIterates("history does not retain all iterates")
    if len(xs) <= d:
        raise InsufficientIterates("history shorter than the lookahead")
    out = np.empty(len(xs) - d)
    for j in range(len(xs) - d):
        delta = xs[j + d] - xs[j]
        out[j] = math.sqrt(max(float(delta @ A.apply(delta)), 0.0))
    return out


def block_cg(
    A: LinearOperator,
    B: np.ndarray,
    k: int,
    mode: ReorthMode = ReorthMode.FULL,
) -> BlockIterateHistory:
    """Block CG: X_j = Q_j T_j^{-1} E_1 R_0 from block Lanczos."""
    B = np.asarray(B, dtype=float)
    dec = block_lanczos(A, B, k, mode=mode)
    T = dec.to_banded_dense()
    Q = dec.basis
    widths = dec.block_widths
    offs = np.concatenate(([0], np.cumsum(widths))).astype(int)
    m = B.shape[1]
    m0 = widths[0]

    iterates, res = [], []
    termination = "max_iter"
    for j in range(1, len(dec.block_diag) + 1):
        nj = int(offs[j])
        Tj = T[:nj, :nj]
        rhs = np.zeros((nj, m))
        rhs[:m0, :] = dec.initial_R
        try:
            Y = np.linalg.solve(Tj, rhs)
        except np.linalg.LinAlgError:
            iterates.append(None)
            res.append(np.full(m, np.nan))
            continue
        X = Q[:, :nj] @ Y
        R = B - np.column_stack([A.apply(X[:, c]) for c in range(m)])
        iterates.append(X)
        res.append(np.linalg.norm(R, axis=0))
    return BlockIterateHistory(
        iterates=iterates,
        residual_norms=np.asarray(res),
        termination=termination,
        deflation_widths=list(widths),
    )
