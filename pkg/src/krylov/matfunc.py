"""Matrix functions times vectors and quadratic forms: Lanczos-FA (with
the correct and the pitfall formula), two-pass Lanczos-FA, Lanczos-QF,
rational-approximation application, block FA/QF, and an a priori bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LinearOperator, SymTridiagonal, tridiag_apply_function, tridiag_solve
from .errors import (
    FunctionDomainError,
    NonFiniteSample,
    SingularSystem,
    ZeroStartVector,
)
from .lanczos import (
    DEFAULT_BREAKDOWN_TOL,
    ReorthMode,
    Termination,
    _three_term_y,
    block_lanczos,
    lanczos,
)

__all__ = [
    "MatFuncResult",
    "lanczos_fa",
    "two_pass_lanczos_fa",
    "lanczos_qf",
    "rational_apply",
    "block_lanczos_fa",
    "block_lanczos_qf",
    "fa_apriori_bound",
]


@dataclass(frozen=True)
class MatFuncResult:
    """Result of a Lanczos-FA/QF evaluation with basic diagnostics."""

    value: object  # length-d vector (FA) or scalar / m x m matrix (QF)
    k_used: int
    diagnostics: dict


def _ordered_accumulate(columns, coeffs, b_norm):
    """res = sum_n (b_norm * coeffs[n]) * q_n, fixed left-to-right order.

    Shared by the in-memory and two-pass paths so their results are
    bit-identical under deterministic arithmetic.
    """
    res = None
    for n, q in enumerate(columns):
        term = (b_norm * coeffs[n]) * q
        res = term if res is None else res + term
    return res


def lanczos_fa(
    A: LinearOperator,
    b: np.ndarray,
    f,
    k: int,
    mode: ReorthMode = ReorthMode.FULL,
    formula: str = "correct",
) -> MatFuncResult:
    """Lanczos approximation to f(A) b.

    ``formula="correct"`` evaluates ||b|| Q f(T) e1.  ``formula="pitfall"``
    evaluates Q f(T) Q^T b instead, which is *not* equivalent once
    orthogonality degrades; it exists only to demonstrate the failure.
    """
    dec = lanczos(A, b, k, mode=mode)
    Q, T, b_norm = dec.basis, dec.T, dec.b_norm
    if formula == "correct":
        coeffs = tridiag_apply_function(T, f)
        value = _ordered_accumulate(Q.T, coeffs, b_norm)
    elif formula == "pitfall":
        from .core import sym_tridiag_eig

        eig = sym_tridiag_eig(T)
        with np.errstate(all="ignore"):
            fvals = np.asarray([f(t) for t in eig.eigenvalues], dtype=float)
        if not np.all(np.isfinite(fvals)):
            raise FunctionDomainError("f not finite on the Ritz values")
        w = eig.eigenvectors.T @ (Q.T @ np.asarray(b, dtype=float))
        value = Q @ (eig.eigenvectors @ (fvals * w))
    else:
        raise ValueError(f"unknown formula {formula!r}")
    gram = Q.T @ Q
    diagnostics = {
        "orthogonality_loss": float(
            np.abs(gram - np.eye(gram.shape[0])).max()
        ),
        "trailing_beta": dec.trailing_beta,
    }
    return MatFuncResult(value=value, k_used=T.size, diagnostics=diagnostics)


def _streaming_pass(A, b, k, checkpoint_stride=None, breakdown_tol=DEFAULT_BREAKDOWN_TOL):
    """Plain (no reorthogonalization) Lanczos keeping O(1) vectors.

    Returns (alphas, betas, trailing_beta, b_norm, checkpoints, k_used)
    where ``checkpoints[j] = (q_prev, q, n)`` seeds regeneration of the
    segment starting at index n = j * stride.  The arithmetic matches
    :func:`krylov.lanczos.lanczos` with ``mode=ReorthMode.NONE`` exactly.
    """
    b = np.asarray(b, dtype=float)
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        raise ZeroStartVector("starting vector has zero norm")

    q = b / b_norm
    q_prev = None
    beta_prev = 0.0
    alphas, betas = [], []
    checkpoints = []
    scale = 0.0
    for n in range(k):
        if checkpoint_stride is not None and n % checkpoint_stride == 0:
            checkpoints.append((q_prev, q, n))
        y = _three_term_y(A, q_prev, q, beta_prev, n)
        alpha = float(q @ y)
        z = y - alpha * q
        beta = float(np.linalg.norm(z))
        alphas.append(alpha)
        scale = max(scale, abs(alpha))
        if beta <= breakdown_tol * scale:
            return alphas, betas, beta, b_norm, checkpoints, len(alphas)
        scale = max(scale, beta)
        if n == k - 1:
            return alphas, betas, beta, b_norm, checkpoints, len(alphas)
        betas.append(beta)
        q_prev = q
        beta_prev = beta
        q = z / beta
    return alphas, betas, 0.0, b_norm, checkpoints, len(alphas)


def two_pass_lanczos_fa(
    A: LinearOperator,
    b: np.ndarray,
    f,
    k: int,
    checkpoint_stride: int,
) -> MatFuncResult:
    """Low-memory Lanczos-FA: a first pass computes T while keeping only
    checkpoint vector pairs every ``checkpoint_stride`` steps; a second
    pass regenerates the basis segment by segment from the stored
    coefficients (no inner products) and accumulates the result.

    Bit-identical to ``lanczos_fa(mode=ReorthMode.NONE)`` under the
    library's deterministic evaluation order.
    """
    if checkpoint_stride < 1:
        raise ValueError("checkpoint_stride must be at least 1")
    alphas, betas, trailing, b_norm, checkpoints, k_used = _streaming_pass(
        A, b, k, checkpoint_stride=checkpoint_stride
    )
    T = SymTridiagonal(np.asarray(alphas), np.asarray(betas))
    coeffs = tridiag_apply_function(T, f)

    def regenerate():
        for seg, (q_prev, q, start) in enumerate(checkpoints):
            stop = min(start + checkpoint_stride, k_used)
            beta_prev = betas[start - 1] if start > 0 else 0.0
            for n in range(start, stop):
                yield q
                if n + 1 >= k_used or n + 1 >= stop:
                    break
                y = _three_term_y(A, q_prev, q, beta_prev, n)
                z = y - alphas[n] * q
                beta_prev = betas[n]
                q_prev = q
                q = z / beta_prev

    value = _ordered_accumulate(regenerate(), coeffs, b_norm)
    return MatFuncResult(
        value=value,
        k_used=k_used,
        diagnostics={"orthogonality_loss": np.nan, "trailing_beta": trailing},
    )


def lanczos_qf(
    A: LinearOperator,
    b: np.ndarray,
    f,
    k: int,
    mode: ReorthMode = ReorthMode.NONE,
) -> float:
    """Lanczos quadratic-form estimate of b^T f(A) b: the k-point Gaussian
    quadrature of the spectral measure of (A, b), evaluated without ever
    touching the basis (O(d) memory when ``mode=ReorthMode.NONE``)."""
    if mode is ReorthMode.NONE:
        alphas, betas, _, b_norm, _, _ = _streaming_pass(A, b, k)
        T = SymTridiagonal(np.asarray(alphas), np.asarray(betas))
    else:
        dec = lanczos(A, b, k, mode=mode)
        T, b_norm = dec.T, dec.b_norm
    coeffs = tridiag_apply_function(T, f)
    return float(b_norm**2 * coeffs[0])


def rational_apply(
    A: LinearOperator,
    b: np.ndarray,
    family,
    k: int,
    method: str = "fa_shifted",
    mode: ReorthMode = ReorthMode.FULL,
):
    """Apply a rational approximation sum_i w_i (A - z_i I)^{-1} b with a
    single shared Lanczos run.

    ``method="fa_shifted"`` performs the shifted small tridiagonal solves
    directly; ``method="multi_shift"`` routes through the multi-shift
    solver.  When shifts come in conjugate pairs with conjugate weights
    the imaginary part (checked to be negligible) is discarded.
    """
    shifts = np.asarray(family.shifts, dtype=complex)
    weights = np.asarray(family.weights, dtype=complex)

    if method == "multi_shift":
        from .solvers import multi_shift_solve

        hists = multi_shift_solve(A, b, shifts, k, method="cg", mode=mode)
        parts = [h.final for h in hists]
    elif method == "fa_shifted":
        dec = lanczos(A, b, k, mode=mode)
        Q, T, b_norm = dec.basis, dec.T, dec.b_norm
        e1 = np.zeros(T.size)
        e1[0] = b_norm
        parts = []
        errors = []
        for z in shifts:
            zval = z if z.imag != 0.0 else z.real
            try:
                y = tridiag_solve(T, e1, shift=zval)
            except SingularSystem as exc:
                errors.append((z, exc))
                continue
            parts.append(Q @ y)
        if errors:
            raise SingularSystem(
                f"singular shifted solves at {[z for z, _ in errors]}"
            )
    else:
        raise ValueError(f"unknown method {method!r}")

    result = np.zeros(A.dim, dtype=complex)
    for w, x in zip(weights, parts):
        result = result + w * np.asarray(x, dtype=complex)
    scale = float(np.abs(result).max()) or 1.0
    if float(np.abs(result.imag).max()) <= 1e-10 * scale:
        return result.real
    return result


def block_lanczos_fa(A: LinearOperator, B: np.ndarray, f, k: int) -> np.ndarray:
    """Block Lanczos approximation to f(A) B."""
    B = np.asarray(B, dtype=float)
    dec = block_lanczos(A, B, k)
    T = dec.to_banded_dense()
    fT = _dense_symmetric_function(T, f)
    m0 = dec.block_widths[0]
    return dec.basis @ (fT[:, :m0] @ dec.initial_R)


def block_lanczos_qf(A: LinearOperator, B: np.ndarray, f, k: int) -> np.ndarray:
    """Block Lanczos quadratic form: approximation to B^T f(A) B,
    returned symmetrized."""
    B = np.asarray(B, dtype=float)
    dec = block_lanczos(A, B, k)
    T = dec.to_banded_dense()
    fT = _dense_symmetric_function(T, f)
    m0 = dec.block_widths[0]
    out = dec.initial_R.T @ fT[:m0, :m0] @ dec.initial_R
    return 0.5 * (out + out.T)


def _dense_symmetric_function(T: np.ndarray, f) -> np.ndarray:
    vals, vecs = np.linalg.eigh(T)
    with np.errstate(all="ignore"):
        fvals = np.asarray([f(t) for t in vals], dtype=float)
    if not np.all(np.isfinite(fvals)):
        raise FunctionDomainError("f not finite on the block Ritz values")
    return (vecs * fvals) @ vecs.T


def fa_apriori_bound(f, interval, k: int, b_norm: float = 1.0) -> float:
    """A priori uniform-approximation bound 2 ||b|| min_{deg p < k}
    ||f - p|| on the interval, with the min replaced by the Chebyshev
    interpolant's sup error on a 10^4-point grid, inflated by a factor 4
    of Lebesgue-constant slack."""
    a, c = float(interval[0]), float(interval[1])
    if not c > a:
        raise ValueError("interval must have positive length")
    if k < 1:
        raise ValueError("k must be at least 1")
    # Interpolation at the k Chebyshev points (degree k - 1).
    theta = (np.arange(k) + 0.5) * np.pi / k
    xt = np.cos(theta)
    x = 0.5 * (c - a) * xt + 0.5 * (a + c)
    with np.errstate(all="ignore"):
        fv = np.asarray([f(xi) for xi in x], dtype=float)
    if not np.all(np.isfinite(fv)):
        raise NonFiniteSample("f not finite at a Chebyshev point")
    ns = np.arange(k)
    coeffs = (np.cos(np.outer(ns, theta)) @ fv) * (2.0 / k)
    coeffs[0] *= 0.5

    grid_t = np.linspace(-1.0, 1.0, 10_000)
    grid = 0.5 * (c - a) * grid_t + 0.5 * (a + c)
    p = np.polynomial.chebyshev.chebval(grid_t, coeffs)
    with np.errstate(all="ignore"):
        fg = np.asarray([f(xi) for xi in grid], dtype=float)
    if not np.all(np.isfinite(fg)):
        raise NonFiniteSample("f not finite on the interval grid")
    err = float(np.abs(fg - p).max())
    return 2.0 * b_norm * 4.0 * err
