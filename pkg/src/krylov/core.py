"""Small dense kernels: symmetric tridiagonal eigenproblems and solves,
plus the matrix-free operator contract everything else builds on.

All values are immutable after construction and safe to share across
threads; ``LinearOperator.apply`` must tolerate concurrent calls.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import FunctionDomainError, SingularSystem

__all__ = [
    "LinearOperator",
    "SymTridiagonal",
    "ExtendedTridiagonal",
    "TridiagEig",
    "sym_tridiag_eig",
    "tridiag_apply_function",
    "tridiag_solve",
]

# Relative pivot threshold below which a small solve is declared singular.
SINGULARITY_RTOL = 1e-14


@dataclass(frozen=True)
class LinearOperator:
    """A dimension-``d`` symmetric matrix-free operator.

    Only matrix-vector products are required.  Symmetry is a caller
    contract, probed by tests via random vectors.
    """

    dim: int
    matvec: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("operator dimension must be positive")

    def apply(self, v: np.ndarray) -> np.ndarray:
        out = np.asarray(self.matvec(np.asarray(v)))
        if out.shape != (self.dim,):
            raise ValueError("operator apply changed the vector length")
        return out

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return self.apply(v)

    @classmethod
    def from_matrix(cls, A) -> "LinearOperator":
        """Wrap a dense or sparse matrix (kept by reference)."""
        d = A.shape[0]
        if A.shape != (d, d):
            raise ValueError("matrix must be square")
        return cls(dim=d, matvec=lambda v: np.asarray(A @ v).reshape(d))

    @classmethod
    def diagonal(cls, diag) -> "LinearOperator":
        diag = np.asarray(diag, dtype=float)
        return cls(dim=diag.size, matvec=lambda v: diag * v)

    def to_dense(self) -> np.ndarray:
        """Materialize the operator by applying it to the identity."""
        d = self.dim
        out = np.empty((d, d))
        e = np.zeros(d)
        for j in range(d):
            e[j] = 1.0
            out[:, j] = self.apply(e)
            e[j] = 0.0
        return out


@dataclass(frozen=True)
class SymTridiagonal:
    """Symmetric tridiagonal matrix given by diagonal and off-diagonal."""

    alphas: np.ndarray
    betas: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alphas", np.asarray(self.alphas, dtype=float))
        object.__setattr__(self, "betas", np.asarray(self.betas, dtype=float))
        if self.alphas.ndim != 1 or self.alphas.size < 1:
            raise ValueError("alphas must be a nonempty 1-d array")
        if self.betas.shape != (self.alphas.size - 1,):
            raise ValueError("betas must have length len(alphas) - 1")

    @property
    def size(self) -> int:
        return self.alphas.size

    def to_dense(self) -> np.ndarray:
        T = np.diag(self.alphas)
        k = self.size
        if k > 1:
            T += np.diag(self.betas, 1) + np.diag(self.betas, -1)
        return T

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.alphas * v
        if self.size > 1:
            out[:-1] += self.betas * v[1:]
            out[1:] += self.betas * v[:-1]
        return out

    def norm_inf(self) -> float:
        """Infinity norm, cheap on the tridiagonal structure."""
        k = self.size
        row = np.abs(self.alphas).astype(float)
        if k > 1:
            row[:-1] += np.abs(self.betas)
            row[1:] += np.abs(self.betas)
        return float(row.max())

    def principal(self, j: int) -> "SymTridiagonal":
        """Leading j-by-j principal submatrix."""
        return SymTridiagonal(self.alphas[:j], self.betas[: j - 1])


@dataclass(frozen=True)
class ExtendedTridiagonal:
    """The (k+1)-by-k matrix obtained by appending a trailing off-diagonal
    entry below a square symmetric tridiagonal."""

    base: SymTridiagonal
    trailing: float

    def to_dense(self) -> np.ndarray:
        k = self.base.size
        out = np.zeros((k + 1, k))
        out[:k, :] = self.base.to_dense()
        out[k, k - 1] = self.trailing
        return out


@dataclass(frozen=True)
class TridiagEig:
    """Eigendecomposition of a symmetric tridiagonal matrix.

    Eigenvalues ascend; eigenvector columns are orthonormal with the first
    nonzero component positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def sym_tridiag_eig(T: SymTridiagonal) -> TridiagEig:
    """Full eigendecomposition of a symmetric tridiagonal matrix.

    Uses the implicit-shift QL/QR LAPACK kernel on the (alpha, beta) pair;
    no dense matrix is formed.
    """
    if T.size == 1:
        vals = np.array([T.alphas[0]])
        vecs = np.array([[1.0]])
        return TridiagEig(vals, vecs)
    vals, vecs = scipy.linalg.eigh_tridiagonal(
        T.alphas, T.betas, lapack_driver="stev"
    )
    # Deterministic sign convention: first nonzero component positive.
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        nz = np.nonzero(col)[0]
        if nz.size and col[nz[0]] < 0:
            vecs[:, j] = -col
    return TridiagEig(vals, vecs)


def tridiag_apply_function(T: SymTridiagonal, f) -> np.ndarray:
    """Return ``f(T) e_1`` via the eigendecomposition of ``T``.

    Raises :class:`FunctionDomainError` if ``f`` is NaN/Inf at any
    eigenvalue of ``T`` (e.g. ``1/x`` with an eigenvalue at zero).
    """
    eig = sym_tridiag_eig(T)
    with np.errstate(all="ignore"):
        fvals = np.asarray([f(t) for t in eig.eigenvalues], dtype=float)
    if not np.all(np.isfinite(fvals)):
        bad = eig.eigenvalues[~np.isfinite(fvals)]
        raise FunctionDomainError(
            f"function is not finite at eigenvalue(s) {bad[:3]}"
        )
    return eig.eigenvectors @ (fvals * eig.eigenvectors[0, :])


def _thomas_solve(T: SymTridiagonal, rhs: np.ndarray, shift) -> np.ndarray:
    """Banded (Thomas) elimination for ``(T - shift I) x = rhs``.

    No pivoting, matching the small-solve contract: a pivot of magnitude
    below ``1e-14 * ||T||`` raises :class:`SingularSystem`.
    """
    k = T.size
    dtype = complex if np.iscomplexobj(np.asarray(shift)) else float
    diag = T.alphas.astype(dtype) - shift
    off = T.betas.astype(float)
    x = np.asarray(rhs, dtype=dtype).copy()
    threshold = SINGULARITY_RTOL * max(T.norm_inf(), abs(shift))
    if threshold == 0.0:
        threshold = SINGULARITY_RTOL

    # Forward elimination.
    d = diag.copy()
    for i in range(k - 1):
        if abs(d[i]) < threshold:
            raise SingularSystem(f"pivot {d[i]!r} at row {i} below threshold")
        m = off[i] / d[i]
        d[i + 1] -= m * off[i]
        x[i + 1] -= m * x[i]
    if abs(d[k - 1]) < threshold:
        raise SingularSystem(f"pivot {d[k-1]!r} at row {k-1} below threshold")

    # Back substitution.
    x[k - 1] /= d[k - 1]
    for i in range(k - 2, -1, -1):
        x[i] = (x[i] - off[i] * x[i + 1]) / d[i]
    return x


def tridiag_solve(T, rhs: np.ndarray, shift=0.0) -> np.ndarray:
    """Solve a small (possibly shifted) tridiagonal system.

    Square ``SymTridiagonal``: exact solve of ``(T - shift I) x = rhs`` by
    banded elimination.  ``ExtendedTridiagonal`` (the (k+1)-by-k case):
    minimum-residual least-squares solution via the normal equations,
    with the shift applied to the square top block.
    """
    if isinstance(T, SymTridiagonal):
        return _thomas_solve(T, rhs, shift)
    if isinstance(T, ExtendedTridiagonal):
        M = T.to_dense().astype(
            complex if np.iscomplexobj(np.asarray(shift)) else float
        )
        k = T.base.size
        M[:k, :] -= shift * np.eye(k)
        rhs = np.asarray(rhs)
        if rhs.shape != (k + 1,):
            raise ValueError("rhs must have length k + 1")
        G = M.conj().T @ M
        g = M.conj().T @ rhs
        try:
            x = np.linalg.solve(G, g)
        except np.linalg.LinAlgError as exc:
            raise SingularSystem(str(exc)) from exc
        if not np.all(np.isfinite(x)):
            raise SingularSystem("rank-deficient rectangular system")
        return x
    raise TypeError(f"unsupported tridiagonal type {type(T)!r}")
