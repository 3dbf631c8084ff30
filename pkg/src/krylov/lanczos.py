"""Orthonormal Krylov basis builders: Arnoldi, Lanczos with selectable
reorthogonalization, and block Lanczos with deflation.

Builders are single-threaded; the returned decompositions are immutable
and safe to share.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import LinearOperator, SymTridiagonal
from .errors import ZeroStartBlock, ZeroStartVector

__all__ = [
    "ReorthMode",
    "Termination",
    "KrylovDecomposition",
    "ArnoldiDecomposition",
    "BlockKrylovDecomposition",
    "arnoldi",
    "lanczos",
    "block_lanczos",
    "krylov_grade",
]

DEFAULT_BREAKDOWN_TOL = 1e-12
DEFAULT_DEFLATION_TOL = 1e-10


class ReorthMode(enum.Enum):
    """Reorthogonalization policy for the Lanczos recurrence."""

    NONE = "none"
    FULL = "full"


@dataclass(frozen=True)
class Termination:
    """How a basis builder stopped: all requested steps, or early breakdown."""

    kind: str  # "completed" or "breakdown"
    step: int

    @property
    def is_breakdown(self) -> bool:
        return self.kind == "breakdown"


@dataclass(frozen=True)
class KrylovDecomposition:
    """A Lanczos decomposition A Q = Q T + beta_last q_next e_last^T."""

    basis: np.ndarray  # d x k
    T: SymTridiagonal
    trailing_beta: float
    next_vector: np.ndarray | None  # None after breakdown
    b_norm: float
    termination: Termination

    @property
    def k(self) -> int:
        return self.T.size


@dataclass(frozen=True)
class ArnoldiDecomposition:
    """An Arnoldi decomposition A Q = Q H + h q_next e_last^T."""

    basis: np.ndarray
    H: np.ndarray
    trailing_h: float
    next_vector: np.ndarray | None
    b_norm: float
    termination: Termination

    @property
    def k(self) -> int:
        return self.H.shape[0]


@dataclass(frozen=True)
class BlockKrylovDecomposition:
    """A block Lanczos decomposition with deflation metadata."""

    basis: np.ndarray  # d x (sum of block widths)
    block_diag: list  # square blocks A_n
    block_offdiag: list  # blocks B_n coupling step n to n+1
    initial_R: np.ndarray  # m x m upper-triangular factor of the start block
    block_widths: list  # width per block step (never grows)
    termination: Termination

    @property
    def total_width(self) -> int:
        return int(sum(self.block_widths))

    def to_banded_dense(self) -> np.ndarray:
        """Assemble the small banded block-tridiagonal matrix T."""
        n = self.total_width
        T = np.zeros((n, n))
        offs = np.concatenate(([0], np.cumsum(self.block_widths))).astype(int)
        for j, Aj in enumerate(self.block_diag):
            T[offs[j] : offs[j + 1], offs[j] : offs[j + 1]] = Aj
        for j, Bj in enumerate(self.block_offdiag):
            if j + 1 >= len(self.block_widths):
                break
            T[offs[j + 1] : offs[j + 2], offs[j] : offs[j + 1]] = Bj
            T[offs[j] : offs[j + 1], offs[j + 1] : offs[j + 2]] = Bj.T
        return T


def _three_term_y(A: LinearOperator, q_prev, q, beta_prev, n):
    """One shared recurrence step: y = A q_n - beta_{n-1} q_{n-1}.

    Kept as a single code path so that streaming regeneration reproduces
    the stored recurrence bit for bit.
    """
    y = A.apply(q)
    if n > 0:
        y = y - beta_prev * q_prev
    return y


def lanczos(
    A: LinearOperator,
    b: np.ndarray,
    k: int,
    mode: ReorthMode = ReorthMode.FULL,
    breakdown_tol: float = DEFAULT_BREAKDOWN_TOL,
) -> KrylovDecomposition:
    """Run k steps of the Lanczos three-term recurrence.

    With ``mode=ReorthMode.FULL`` every new direction is re-orthogonalized
    (classical Gram-Schmidt against all stored vectors, applied twice)
    before normalization, restoring orthogonality to machine precision.
    With ``mode=ReorthMode.NONE`` the plain recurrence runs and the
    resulting T is the finite-precision one -- no orthogonality guarantee.

    Terminates early when the new off-diagonal drops below
    ``breakdown_tol`` times the running coefficient scale.
    """
    b = np.asarray(b, dtype=float)
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        raise ZeroStartVector("starting vector has zero norm")
    if k < 1:
        raise ValueError("k must be at least 1")

    q = b / b_norm
    q_prev = None
    beta_prev = 0.0
    cols = [q]
    alphas: list[float] = []
    betas: list[float] = []
    scale = 0.0
    trailing_beta = 0.0
    next_vector: np.ndarray | None = None
    termination = Termination("completed", k)

    for n in range(k):
        y = _three_term_y(A, q_prev, q, beta_prev, n)
        alpha = float(q @ y)
        z = y - alpha * q
        if mode is ReorthMode.FULL:
            Q = np.stack(cols, axis=1)
            for _ in range(2):
                z = z - Q @ (Q.T @ z)
        beta = float(np.linalg.norm(z))
        alphas.append(alpha)
        scale = max(scale, abs(alpha))
        if beta <= breakdown_tol * scale:
            trailing_beta = beta
            termination = Termination("breakdown", n + 1)
            break
        scale = max(scale, beta)
        if n == k - 1:
            trailing_beta = beta
            next_vector = z / beta
            break
        betas.append(beta)
        q_prev = q
        beta_prev = beta
        q = z / beta
        cols.append(q)

    T = SymTridiagonal(np.asarray(alphas), np.asarray(betas))
    basis = np.stack(cols[: T.size], axis=1)
    return KrylovDecomposition(
        basis=basis,
        T=T,
        trailing_beta=trailing_beta,
        next_vector=next_vector,
        b_norm=b_norm,
        termination=termination,
    )


def arnoldi(
    A: LinearOperator,
    b: np.ndarray,
    k: int,
    breakdown_tol: float = DEFAULT_BREAKDOWN_TOL,
) -> ArnoldiDecomposition:
    """Run k steps of Arnoldi with one classical Gram-Schmidt pass.

    This single-pass variant is faithful to the textbook algorithm and is
    not numerically hardened; it exists mainly to demonstrate that a
    symmetric operator forces an (almost) tridiagonal H.
    """
    b = np.asarray(b, dtype=float)
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        raise ZeroStartVector("starting vector has zero norm")
    if not 1 <= k <= A.dim:
        raise ValueError("need 1 <= k <= dim")

    cols = [b / b_norm]
    H = np.zeros((k, k))
    trailing_h = 0.0
    next_vector = None
    termination = Termination("completed", k)
    scale = 0.0

    for n in range(k):
        Q = np.stack(cols, axis=1)
        y = A.apply(cols[n])
        h = Q.T @ y
        y = y - Q @ h
        H[: n + 1, n] = h
        scale = max(scale, float(np.abs(h).max()) if h.size else 0.0)
        hn = float(np.linalg.norm(y))
        if hn <= breakdown_tol * scale:
            trailing_h = hn
            termination = Termination("breakdown", n + 1)
            H = H[: n + 1, : n + 1]
            break
        scale = max(scale, hn)
        if n == k - 1:
            trailing_h = hn
            next_vector = y / hn
            break
        H[n + 1, n] = hn
        cols.append(y / hn)

    basis = np.stack(cols[: H.shape[0]], axis=1)
    return ArnoldiDecomposition(
        basis=basis,
        H=H,
        trailing_h=trailing_h,
        next_vector=next_vector,
        b_norm=b_norm,
        termination=termination,
    )


def _qr_deflate(Z: np.ndarray, tol_abs: float):
    """Orthonormalize the columns of Z, dropping numerically dependent ones.

    Returns (Q, C, rank) with Q orthonormal of the detected rank and
    C = Q^T Z the coupling block.  Rank is detected by column-pivoted QR;
    when no deflation occurs C is upper-triangular with positive diagonal.
    """
    m = Z.shape[1]
    if m == 0:
        return Z[:, :0], np.zeros((0, 0)), 0
    scale = float(np.linalg.norm(Z, 2)) if Z.size else 0.0
    if scale == 0.0:
        return Z[:, :0], np.zeros((0, m)), 0
    Qp, Rp, _ = scipy.linalg.qr(Z, mode="economic", pivoting=True)
    rank = int(np.sum(np.abs(np.diag(Rp)) > tol_abs))
    if rank == 0:
        return Z[:, :0], np.zeros((0, m)), 0
    if rank == m:
        Q, R = np.linalg.qr(Z)
        signs = np.sign(np.diag(R))
        signs[signs == 0] = 1.0
        Q = Q * signs
        R = signs[:, None] * R
        return Q, R, m
    # Deflated step: orthonormal basis from the pivoted factorization.
    Q = Qp[:, :rank]
    C = Q.T @ Z
    return Q, C, rank


def block_lanczos(
    A: LinearOperator,
    B: np.ndarray,
    k: int,
    mode: ReorthMode = ReorthMode.FULL,
    deflation_tol: float = DEFAULT_DEFLATION_TOL,
) -> BlockKrylovDecomposition:
    """Run k block Lanczos steps with rank-revealing QR deflation."""
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[1] < 1:
        raise ValueError("B must be a d x m matrix with m >= 1")
    if deflation_tol <= 0:
        raise ValueError("deflation_tol must be positive")

    scale0 = float(np.linalg.norm(B, 2))
    Q0, R0, rank0 = _qr_deflate(B, deflation_tol * scale0 if scale0 else 0.0)
    if rank0 == 0:
        raise ZeroStartBlock("starting block has numerical rank zero")

    blocks = [Q0]
    widths = [rank0]
    block_diag: list[np.ndarray] = []
    block_offdiag: list[np.ndarray] = []
    termination = Termination("completed", k)

    Qn = Q0
    Qn_prev = None
    Bn_prev = None
    for n in range(k):
        Y = np.column_stack([A.apply(Qn[:, j]) for j in range(Qn.shape[1])])
        if n > 0:
            Y = Y - Qn_prev @ Bn_prev.T
        An = Qn.T @ Y
        An = 0.5 * (An + An.T)
        Z = Y - Qn @ An
        if mode is ReorthMode.FULL:
            Qall = np.column_stack(blocks)
            for _ in range(2):
                Z = Z - Qall @ (Qall.T @ Z)
        block_diag.append(An)
        if n == k - 1:
            break
        zscale = float(np.linalg.norm(Z, 2)) if Z.size else 0.0
        Qnext, Bn, rank = _qr_deflate(Z, deflation_tol * max(zscale, 1e-300))
        block_offdiag.append(Bn)
        if rank == 0:
            termination = Termination("breakdown", n + 1)
            break
        blocks.append(Qnext)
        widths.append(rank)
        Qn_prev, Bn_prev, Qn = Qn, Bn, Qnext

    return BlockKrylovDecomposition(
        basis=np.column_stack(blocks),
        block_diag=block_diag,
        block_offdiag=block_offdiag,
        initial_R=R0,
        block_widths=widths,
        termination=termination,
    )


def krylov_grade(
    A: LinearOperator, b: np.ndarray, tol: float = DEFAULT_BREAKDOWN_TOL
) -> int:
    """Numerical grade of b: the step at which fully reorthogonalized
    Lanczos breaks down, i.e. the number of support points of the spectral
    measure of (A, b)."""
    dec = lanczos(A, b, k=A.dim, mode=ReorthMode.FULL, breakdown_tol=tol)
    return dec.T.size
