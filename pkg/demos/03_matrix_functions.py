"""Approximating f(A) b without ever forming f(A).

This walkthrough covers the matrix-function layer:

- the Lanczos approximation ||b|| Q f(T) e1 and why the tempting
  alternative Q f(T) Q^T b fails once orthogonality degrades,
- the two-pass variant that needs only O(1) long vectors yet reproduces
  the in-memory result bit for bit,
- quadratic forms b^T f(A) b from the tridiagonal matrix alone,
- rational functions sum_i w_i (A - z_i I)^{-1} b from one shared basis.

Run with:  python3 demos/03_matrix_functions.py
"""

import numpy as np

from krylov import (
    ReorthMode,
    ShiftFamily,
    lanczos_fa,
    lanczos_qf,
    rational_apply,
    two_pass_lanczos_fa,
)
from krylov.matrices import GradedSpectrum, generate_operator

rng = np.random.default_rng(2)

gen = generate_operator(GradedSpectrum(d=64, lam_min=1e-3, lam_max=1.0, rho=0.8))
A, vals = gen.operator, gen.eigenvalues
b = rng.standard_normal(A.dim)

f = lambda x: np.exp(-x)
exact = np.exp(-vals) * b
scale = np.linalg.norm(exact)

# ----------------------------------------------------------------------
# Correct formula vs the pitfall, both WITHOUT reorthogonalization.
# The correct formula keeps converging; the pitfall variant stalls as
# soon as Q^T Q drifts from the identity.
# ----------------------------------------------------------------------
print("k    correct formula   pitfall formula   (relative error)")
for k in (10, 20, 40, 60):
    good = lanczos_fa(A, b, f, k, mode=ReorthMode.NONE, formula="correct")
    bad = lanczos_fa(A, b, f, k, mode=ReorthMode.NONE, formula="pitfall")
    eg = np.linalg.norm(good.value - exact) / scale
    eb = np.linalg.norm(bad.value - exact) / scale
    print(f"{k:3d}  {eg:.3e}         {eb:.3e}")

# ----------------------------------------------------------------------
# Two-pass evaluation: same numbers, a fraction of the memory.  The
# first pass streams the tridiagonal coefficients keeping checkpoints
# every few steps; the second regenerates the basis segment by segment.
# ----------------------------------------------------------------------
k = 40
one_pass = lanczos_fa(A, b, f, k, mode=ReorthMode.NONE)
two_pass = two_pass_lanczos_fa(A, b, f, k, checkpoint_stride=8)
identical = np.array_equal(one_pass.value, two_pass.value)
print(f"\ntwo-pass output bit-identical to in-memory output: {identical}")

# ----------------------------------------------------------------------
# Quadratic forms: b^T f(A) b needs only the tridiagonal coefficients,
# never the basis -- this is a k-point Gaussian quadrature of the
# spectral measure that A and b induce.
# ----------------------------------------------------------------------
qf = lanczos_qf(A, b, np.log, 25)
truth = float(b @ (np.log(vals) * b))
print(f"\nb^T log(A) b: estimate {qf:.10f}, truth {truth:.10f}")

# ----------------------------------------------------------------------
# Rational functions: a proxy for f built from simple poles is applied
# with one Lanczos run, solving every shifted system in the small
# tridiagonal space.  Here: 1/((x+1)(x+2)) by partial fractions.
# ----------------------------------------------------------------------
fam = ShiftFamily(shifts=[-1.0, -2.0], weights=[1.0, -1.0])
got = rational_apply(A, b, fam, k=40)
exact_rat = b / ((vals + 1.0) * (vals + 2.0))
print(
    "rational apply error: "
    f"{np.linalg.norm(got - exact_rat) / np.linalg.norm(exact_rat):.3e}"
)
