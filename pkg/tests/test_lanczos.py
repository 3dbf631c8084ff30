import numpy as np
import pytest

from krylov.core import LinearOperator
from krylov.errors import ZeroStartBlock, ZeroStartVector
from krylov.lanczos import (
    ReorthMode,
    arnoldi,
    block_lanczos,
    krylov_grade,
    lanczos,
)
from krylov.orthopoly import DiscreteMeasure, stieltjes


def random_symmetric(rng, d):
    M = rng.standard_normal((d, d))
    return 0.5 * (M + M.T)


class TestLanczos:
    def test_zero_start(self):
        A = LinearOperator.diagonal([1.0, 2.0])
        with pytest.raises(ZeroStartVector):
            lanczos(A, np.zeros(2), 2)

    def test_eigenvector_start_breaks_down(self):
        A = LinearOperator.diagonal([4.0, 2.0, 1.0])
        e1 = np.array([1.0, 0.0, 0.0])
        dec = lanczos(A, e1, 3)
        assert dec.T.size == 1
        assert dec.T.alphas[0] == pytest.approx(4.0)
        assert dec.termination.is_breakdown
        assert dec.next_vector is None

    def test_alpha0_is_rayleigh_quotient(self):
        A = LinearOperator.diagonal([0.0, 1.0, 2.0])
        b = np.ones(3) / np.sqrt(3)
        dec = lanczos(A, b, 2)
        assert dec.T.alphas[0] == pytest.approx(1.0, abs=1e-14)

    def test_beta0_derived(self):
        # beta_0 = ||(A - alpha_0 I) q_0|| = sqrt(2/3) for this 3-point
        # spectral measure (independently via the Stieltjes recurrence).
        A = LinearOperator.diagonal([0.0, 1.0, 2.0])
        b = np.ones(3) / np.sqrt(3)
        dec = lanczos(A, b, 2)
        assert dec.T.betas[0] == pytest.approx(np.sqrt(2 / 3), abs=1e-14)

    def test_full_reorth_invariants(self):
        rng = np.random.default_rng(0)
        d, k = 40, 15
        M = random_symmetric(rng, d)
        A = LinearOperator.from_matrix(M)
        b = rng.standard_normal(d)
        dec = lanczos(A, b, k, mode=ReorthMode.FULL)
        Q = dec.basis
        assert np.abs(Q.T @ Q - np.eye(k)).max() <= 1e-10
        R = M @ Q - Q @ dec.T.to_dense()
        R[:, -1] -= dec.trailing_beta * dec.next_vector
        assert np.abs(R).max() <= 1e-10 * np.linalg.norm(M, 2)
        assert np.abs(np.linalg.norm(Q, axis=0) - 1).max() <= 1e-12

    def test_unit_columns_without_reorth(self):
        rng = np.random.default_rng(1)
        d = 60
        vals = np.geomspace(1e-3, 1.0, d)
        A = LinearOperator.diagonal(vals)
        b = rng.standard_normal(d)
        dec = lanczos(A, b, 40, mode=ReorthMode.NONE)
        assert np.abs(np.linalg.norm(dec.basis, axis=0) - 1).max() <= 1e-12

    def test_shift_invariance(self):
        rng = np.random.default_rng(2)
        d = 25
        M = random_symmetric(rng, d)
        b = rng.standard_normal(d)
        z = 0.7
        dec = lanczos(LinearOperator.from_matrix(M), b, 10)
        dec_s = lanczos(LinearOperator.from_matrix(M - z * np.eye(d)), b, 10)
        assert np.abs(dec.T.alphas - z - dec_s.T.alphas).max() <= 1e-12
        assert np.abs(dec.T.betas - dec_s.T.betas).max() <= 1e-12
        assert np.abs(dec.basis - dec_s.basis).max() <= 1e-10

    def test_stieltjes_consistency(self):
        # Lanczos coefficients equal the recurrence coefficients of the
        # discrete spectral measure built from a dense eigendecomposition.
        rng = np.random.default_rng(3)
        d, k = 30, 8
        M = random_symmetric(rng, d)
        b = rng.standard_normal(d)
        b /= np.linalg.norm(b)
        dec = lanczos(LinearOperator.from_matrix(M), b, k)

        vals, vecs = np.linalg.eigh(M)
        weights = (vecs.T @ b) ** 2
        psi = DiscreteMeasure(vals, weights)
        T_st = stieltjes(psi, k)
        assert np.abs(dec.T.alphas - T_st.alphas).max() <= 1e-10
        assert np.abs(dec.T.betas - T_st.betas).max() <= 1e-10
        assert dec.T.betas.min() > 1e-6

    def test_orthogonal_transform_invariance(self):
        rng = np.random.default_rng(4)
        d = 20
        M = random_symmetric(rng, d)
        b = rng.standard_normal(d)
        Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
        dec1 = lanczos(LinearOperator.from_matrix(M), b, 8)
        dec2 = lanczos(LinearOperator.from_matrix(Q @ M @ Q.T), Q @ b, 8)
        assert np.abs(dec1.T.alphas - dec2.T.alphas).max() <= 1e-10
        assert np.abs(dec1.T.betas - dec2.T.betas).max() <= 1e-10

    def test_ritz_containment(self):
        from krylov.core import sym_tridiag_eig

        d = 60
        vals = np.geomspace(1e-3, 1.0, d)
        A = LinearOperator.diagonal(vals)
        b = np.ones(d) / np.sqrt(d)
        for mode, eta in ((ReorthMode.FULL, 1e-12), (ReorthMode.NONE, 1e-8)):
            dec = lanczos(A, b, 40, mode=mode)
            ritz = sym_tridiag_eig(dec.T).eigenvalues
            norm = vals.max()
            assert ritz.min() >= vals.min() - eta * norm
            assert ritz.max() <= vals.max() + eta * norm


class TestArnoldi:
    def test_identity_terminates(self):
        A = LinearOperator.diagonal(np.ones(4))
        dec = arnoldi(A, np.ones(4), 3)
        assert dec.H.shape == (1, 1)
        assert dec.H[0, 0] == pytest.approx(1.0)
        assert dec.termination.is_breakdown

    def test_matches_lanczos_on_symmetric(self):
        A = LinearOperator.diagonal([1.0, 2.0])
        b = np.ones(2) / np.sqrt(2)
        arn = arnoldi(A, b, 2)
        lan = lanczos(A, b, 2)
        T = lan.T.to_dense()
        assert np.abs(arn.H - T).max() <= 1e-12

    def test_symmetric_forces_tridiagonal(self):
        rng = np.random.default_rng(5)
        d, k = 30, 12
        M = random_symmetric(rng, d)
        dec = arnoldi(LinearOperator.from_matrix(M), rng.standard_normal(d), k)
        for i in range(k):
            for j in range(i + 2, k):
                assert abs(dec.H[i, j]) <= 1e-10

    def test_invariants(self):
        rng = np.random.default_rng(6)
        d, k = 30, 10
        M = random_symmetric(rng, d)
        dec = arnoldi(LinearOperator.from_matrix(M), rng.standard_normal(d), k)
        Q = dec.basis
        assert np.abs(Q.T @ Q - np.eye(k)).max() <= 1e-10
        R = M @ Q - Q @ dec.H
        R[:, -1] -= dec.trailing_h * dec.next_vector
        assert np.abs(R).max() <= 1e-10 * np.linalg.norm(M, 2)


class TestBlockLanczos:
    def test_zero_start_block(self):
        A = LinearOperator.diagonal([1.0, 2.0, 3.0])
        with pytest.raises(ZeroStartBlock):
            block_lanczos(A, np.zeros((3, 2)), 2)

    def test_width_one_reduces_to_lanczos(self):
        rng = np.random.default_rng(7)
        d, k = 20, 6
        M = random_symmetric(rng, d)
        b = rng.standard_normal(d)
        A = LinearOperator.from_matrix(M)
        blk = block_lanczos(A, b[:, None], k)
        lan = lanczos(A, b, k)
        alphas = np.array([float(Aj[0, 0]) for Aj in blk.block_diag])
        betas = np.array([float(Bj[0, 0]) for Bj in blk.block_offdiag[: k - 1]])
        assert np.abs(alphas - lan.T.alphas).max() <= 1e-14 * max(abs(M).max(), 1)
        assert np.abs(betas - lan.T.betas).max() <= 1e-13

    def test_invariant_subspace_terminates(self):
        A = LinearOperator.diagonal([1.0, 2.0, 3.0, 4.0])
        B = np.zeros((4, 2))
        B[0, 0] = 1.0
        B[1, 1] = 1.0  # spans an invariant 2-dim eigenspace
        dec = block_lanczos(A, B, 3)
        assert dec.total_width == 2
        assert dec.termination.is_breakdown

    def test_full_rank_with_probability_one(self):
        # Gaussian start block on a spectrum with eigenvalue multiplicity
        # <= block width: the Krylov matrix [B, AB] has full rank.
        rng = np.random.default_rng(8)
        A = LinearOperator.diagonal([1.0, 1.0, 2.0, 2.0])
        B = rng.standard_normal((4, 2))
        dec = block_lanczos(A, B, 2)
        assert dec.total_width == 4
        K = np.column_stack([B, np.diag([1.0, 1.0, 2.0, 2.0]) @ B])
        assert np.linalg.svd(K, compute_uv=False).min() >= 1e-10

    def test_orthonormal_and_reconstruction(self):
        rng = np.random.default_rng(9)
        d, m, k = 30, 3, 5
        M = random_symmetric(rng, d)
        B = rng.standard_normal((d, m))
        dec = block_lanczos(LinearOperator.from_matrix(M), B, k)
        Q = dec.basis
        assert np.abs(Q.T @ Q - np.eye(Q.shape[1])).max() <= 1e-8
        T = dec.to_banded_dense()
        R = M @ Q - Q @ T
        # The residual lives only in the trailing block columns.
        w_last = dec.block_widths[-1]
        assert np.abs(R[:, : Q.shape[1] - w_last]).max() <= 1e-8 * np.linalg.norm(M, 2)

    def test_deflation_drops_dependent_columns(self):
        rng = np.random.default_rng(10)
        d = 12
        vals = np.arange(1.0, d + 1)
        A = LinearOperator.diagonal(vals)
        B = rng.standard_normal((d, 2))
        B = np.column_stack([B, B[:, 0] + B[:, 1]])  # rank 2 out of 3
        dec = block_lanczos(A, B, 2)
        assert dec.block_widths[0] == 2

    def test_krylov_nesting(self):
        # Every block basis vector of a run started inside K_{k+1}(A, w)
        # lies in the span of the larger Krylov space K_{k+t}(A, w).
        rng = np.random.default_rng(11)
        d, k, t = 20, 3, 3
        M = random_symmetric(rng, d)
        A = LinearOperator.from_matrix(M)
        w = rng.standard_normal(d)
        start = np.column_stack(
            [w, M @ w, M @ (M @ w)]
        )  # columns inside K_{k+1}(A, w), k = 2
        dec = block_lanczos(A, start, t)
        # dense Krylov basis of K_{k+t}(A, w)
        cols = [w]
        for _ in range(k + t - 1):
            cols.append(M @ cols[-1])
        K, _ = np.linalg.qr(np.column_stack(cols))
        resid = dec.basis - K @ (K.T @ dec.basis)
        assert np.abs(resid).max() <= 1e-8


class TestKrylovGrade:
    def test_identity(self):
        A = LinearOperator.diagonal(np.ones(5))
        assert krylov_grade(A, np.ones(5)) == 1

    def test_distinct_eigenvalues(self):
        A = LinearOperator.diagonal([1.0, 2.0, 3.0])
        assert krylov_grade(A, np.array([1.0, 1.0, 1.0])) == 3

    def test_repeated_eigenvalue(self):
        A = LinearOperator.diagonal([1.0, 1.0, 2.0])
        assert krylov_grade(A, np.ones(3) / np.sqrt(3)) == 2
