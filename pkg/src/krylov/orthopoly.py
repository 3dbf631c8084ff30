"""Orthogonal-polynomial layer: Chebyshev evaluation and approximation,
the Stieltjes procedure, Jacobi-matrix/Gaussian-quadrature conversion,
modified moments, Jackson damping, CDFs and Wasserstein distance.

All functions are pure and operate on immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LinearOperator, SymTridiagonal, sym_tridiag_eig
from .errors import InsufficientSupport, MassMismatch, NonFiniteSample

__all__ = [
    "DiscreteMeasure",
    "ChebyshevExpansion",
    "JacksonWeights",
    "CdfComparison",
    "cheb_eval",
    "cheb_approximant",
    "stieltjes",
    "gauss_quadrature",
    "modified_moments",
    "jackson_damping",
    "wasserstein",
    "cdf_compare",
]

MERGE_RTOL = 1e-12


@dataclass(frozen=True)
class DiscreteMeasure:
    """A nonnegative discrete measure: ascending nodes with weights.

    Construction sorts the nodes and merges coincident ones (within
    ``1e-12`` of the node span), summing their weights.
    """

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if nodes.size == 0 or nodes.shape != weights.shape:
            raise ValueError("nodes and weights must be nonempty, same length")
        order = np.argsort(nodes, kind="stable")
        nodes, weights = nodes[order], weights[order]
        span = float(nodes[-1] - nodes[0])
        tol = MERGE_RTOL * span
        merged_nodes = [nodes[0]]
        merged_weights = [weights[0]]
        for x, w in zip(nodes[1:], weights[1:]):
            if x - merged_nodes[-1] <= tol:
                merged_weights[-1] += w
            else:
                merged_nodes.append(x)
                merged_weights.append(w)
        nodes = np.asarray(merged_nodes)
        weights = np.asarray(merged_weights)
        if np.any(weights < -1e-12 * max(weights.sum(), 1.0)):
            raise ValueError("weights must be nonnegative")
        weights = np.maximum(weights, 0.0)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    def cdf(self, x) -> np.ndarray:
        """Right-continuous cumulative distribution function."""
        cum = np.cumsum(self.weights)
        idx = np.searchsorted(self.nodes, np.asarray(x, dtype=float), side="right")
        out = np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)
        return out

    def moment(self, degree: int) -> float:
        """Raw moment: sum of weight * node**degree."""
        return float(np.sum(self.weights * self.nodes**degree))

    def normalized(self) -> "DiscreteMeasure":
        return DiscreteMeasure(self.nodes, self.weights / self.total_mass)


def cheb_eval(kind: str, n: int, x):
    """Evaluate the Chebyshev polynomial T_n or U_n by the forward
    three-term recurrence."""
    if kind not in ("T", "U"):
        raise ValueError("kind must be 'T' or 'U'")
    if n < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = x if kind == "T" else 2.0 * x
    for _ in range(n - 1):
        p, p_prev = 2.0 * x * p - p_prev, p
    return p if p.ndim else float(p)


def _to_unit(x, interval):
    a, b = interval
    if not b > a:
        raise ValueError("interval must have positive length")
    return (2.0 * np.asarray(x, dtype=float) - (a + b)) / (b - a)


@dataclass(frozen=True)
class ChebyshevExpansion:
    """A Chebyshev-T expansion p(x) = c0 + 2 sum_{n>=1} c_n T_n(x~)
    on an interval, with x~ the affinely mapped variable."""

    coefficients: np.ndarray
    interval: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "coefficients", np.asarray(self.coefficients, dtype=float)
        )
        object.__setattr__(self, "interval", (float(self.interval[0]), float(self.interval[1])))

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    def __call__(self, x):
        xt = _to_unit(x, self.interval)
        c = self.coefficients
        out = np.full_like(np.asarray(xt, dtype=float), c[0])
        t_prev = np.ones_like(out)
        t = xt
        for n in range(1, c.size):
            out = out + 2.0 * c[n] * t
            t, t_prev = 2.0 * xt * t - t_prev, t
        return out


def cheb_approximant(f, degree: int, interval=(-1.0, 1.0)) -> ChebyshevExpansion:
    """Degree-k Chebyshev approximant of f on an interval.

    Coefficients are Gauss-Chebyshev quadratures of f against the T
    polynomials with 2(k+1) nodes, exact whenever f is a polynomial of
    degree <= k; the expansion is then the best approximation in the
    Chebyshev weighted L2 norm.
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    a, b = float(interval[0]), float(interval[1])
    N = 2 * (degree + 1)
    theta = (np.arange(N) + 0.5) * np.pi / N
    xt = np.cos(theta)
    x = 0.5 * (b - a) * xt + 0.5 * (a + b)
    with np.errstate(all="ignore"):
        fv = np.asarray([f(xi) for xi in x], dtype=float)
    if not np.all(np.isfinite(fv)):
        raise NonFiniteSample("f is not finite at a Chebyshev quadrature node")
    n = np.arange(degree + 1)
    # c_n = (1/N) sum_j f(x_j) cos(n theta_j)
    coeffs = (np.cos(np.outer(n, theta)) @ fv) / N
    return ChebyshevExpansion(coeffs, (a, b))


def stieltjes(measure: DiscreteMeasure, k: int) -> SymTridiagonal:
    """Recurrence coefficients of the orthonormal polynomials of the
    normalized measure, by running fully reorthogonalized Lanczos on the
    diagonal operator of the nodes with start vector sqrt(weights/mass)."""
    from .lanczos import ReorthMode, lanczos

    if measure.total_mass <= 0:
        raise ValueError("measure must have positive total mass")
    if k > measure.n_nodes:
        raise InsufficientSupport(
            f"k={k} exceeds the {measure.n_nodes} support points"
        )
    A = LinearOperator.diagonal(measure.nodes)
    start = np.sqrt(measure.weights / measure.total_mass)
    dec = lanczos(A, start, k, mode=ReorthMode.FULL)
    return dec.T


def gauss_quadrature(M: SymTridiagonal, total_mass: float = 1.0) -> DiscreteMeasure:
    """Gaussian quadrature of the measure represented by a Jacobi matrix:
    nodes are the eigenvalues, weights the scaled squared first eigenvector
    components."""
    eig = sym_tridiag_eig(M)
    weights = total_mass * eig.eigenvectors[0, :] ** 2
    return DiscreteMeasure(eig.eigenvalues, weights)


def modified_moments(
    measure: DiscreteMeasure,
    count: int,
    kind: str = "T",
    interval=(-1.0, 1.0),
) -> np.ndarray:
    """Modified moments m_j = sum_i w_i q_j(x_i) for j < count, with q_j
    the Chebyshev polynomials mapped to the interval (or raw monomials for
    testing)."""
    if count < 1:
        raise ValueError("count must be positive")
    if kind == "monomial":
        xt = measure.nodes
    else:
        xt = _to_unit(measure.nodes, interval)
    out = np.empty(count)
    for j in range(count):
        if kind == "monomial":
            qj = xt**j
        else:
            qj = cheb_eval(kind, j, xt)
        out[j] = float(np.sum(measure.weights * qj))
    return out


@dataclass(frozen=True)
class JacksonWeights:
    """Damping factors rho_0..rho_{2k-1} for a half-degree-k expansion."""

    rho: np.ndarray


def jackson_damping(k: int) -> JacksonWeights:
    """Jackson damping coefficients for Chebyshev expansions of degree
    < 2k; rho_0 = 1 and the factors decrease monotonically, rendering the
    damped kernel nonnegative."""
    if k < 1:
        raise ValueError("k must be at least 1")
    n = np.arange(2 * k, dtype=float)
    denom = 2.0 * k + 1.0
    rho = (
        (2.0 * k - n + 1.0) * np.cos(n * np.pi / denom)
        + np.sin(n * np.pi / denom) / np.tan(np.pi / denom)
    ) / denom
    return JacksonWeights(rho)


def wasserstein(mu1: DiscreteMeasure, mu2: DiscreteMeasure) -> float:
    """1-Wasserstein distance: the exact integral of the absolute CDF
    difference (piecewise constant, so a finite sum)."""
    if abs(mu1.total_mass - mu2.total_mass) > 1e-8:
        raise MassMismatch(
            f"total masses differ: {mu1.total_mass} vs {mu2.total_mass}"
        )
    grid = np.union1d(mu1.nodes, mu2.nodes)
    if grid.size < 2:
        return 0.0
    diff = np.abs(mu1.cdf(grid[:-1]) - mu2.cdf(grid[:-1]))
    return float(np.sum(diff * np.diff(grid)))


@dataclass(frozen=True)
class CdfComparison:
    """Result of comparing a measure's CDF with its Gaussian quadrature's."""

    straddle_ok: np.ndarray  # one boolean per quadrature node
    sign_changes: int

    @property
    def all_straddle(self) -> bool:
        return bool(np.all(self.straddle_ok))


def cdf_compare(mu: DiscreteMeasure, quad: DiscreteMeasure) -> CdfComparison:
    """Check the CDF straddle property at every quadrature node -- the
    quadrature CDF passes from below the measure CDF to above it -- and
    count sign changes of the CDF difference on the merged grid."""
    mass = max(mu.total_mass, quad.total_mass)
    tol = 1e-12 * max(mass, 1.0)

    cum = np.concatenate(([0.0], np.cumsum(quad.weights)))
    ok = np.empty(quad.n_nodes, dtype=bool)
    for i, theta in enumerate(quad.nodes):
        left = cum[i]  # limit from below at the node
        right = cum[i + 1]  # value just past the node
        m = float(mu.cdf(theta))
        ok[i] = (left <= m + tol) and (m <= right + tol)

    grid = np.union1d(mu.nodes, quad.nodes)
    diff = mu.cdf(grid) - quad.cdf(grid)
    signs = np.sign(np.where(np.abs(diff) <= tol, 0.0, diff))
    signs = signs[signs != 0]
    changes = int(np.sum(signs[1:] != signs[:-1])) if signs.size else 0
    return CdfComparison(straddle_ok=ok, sign_changes=changes)
