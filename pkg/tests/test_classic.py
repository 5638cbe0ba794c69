import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lsft.classic import (
    ConvergenceError,
    ZcaOptions,
    adain,
    adain_ablated,
    interpolate,
    matrix_power_sym,
    sym_eig,
    zca,
    zca_gram_ablated,
)
from lsft.features import centralize, gram


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


class TestSymEig:
    def test_diagonal(self):
        w, V = sym_eig(np.diag([3.0, 1.0]))
        np.testing.assert_allclose(w, [3, 1])
        np.testing.assert_allclose(np.abs(V), np.eye(2), atol=1e-15)

    def test_classic_2x2(self):
        w, _ = sym_eig(np.array([[2.0, 1.0], [1.0, 2.0]]))
        np.testing.assert_allclose(w, [3, 1], rtol=1e-14)

    def test_psd_reconstruction(self, rng):
        A = rng.normal(size=(6, 6))
        M = A @ A.T
        w, V = sym_eig(M)
        assert rel((V * w) @ V.T, M) <= 1e-10

    @pytest.mark.parametrize("C", [1, 2, 3, 7, 16, 33, 64])
    def test_invariants_against_lapack(self, rng, C):
        A = rng.normal(size=(C, C))
        M = A + A.T
        w, V = sym_eig(M)
        assert np.all(np.diff(w) <= 0)
        assert rel((V * w) @ V.T, M) <= 1e-8
        assert np.abs(V.T @ V - np.eye(C)).max() <= 1e-9
        np.testing.assert_allclose(w, np.linalg.eigvalsh(M)[::-1], atol=1e-10 * np.abs(w).max())

    def test_repeated_eigenvalues(self):
        w, V = sym_eig(np.eye(5) * 2.0)
        np.testing.assert_array_equal(w, [2.0] * 5)
        np.testing.assert_allclose(V.T @ V, np.eye(5), atol=1e-15)

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            sym_eig(np.zeros((2, 3)))

    def test_reports_non_convergence(self, rng):
        A = rng.normal(size=(12, 12))
        with pytest.raises(ConvergenceError):
            sym_eig(A + A.T, max_sweeps=1)


class TestMatrixPower:
    def test_identity(self):
        np.testing.assert_allclose(matrix_power_sym(np.eye(3), -0.5), np.eye(3), atol=1e-15)

    def test_diag_sqrt(self):
        np.testing.assert_allclose(matrix_power_sym(np.diag([4.0, 9.0]), 0.5), np.diag([2.0, 3.0]), atol=1e-14)

    def test_square_and_compare(self, rng):
        A = rng.normal(size=(8, 8))
        M = A @ A.T
        R = matrix_power_sym(M, 0.5)
        assert rel(R @ R, M) <= 1e-8

    def test_clamp_makes_singular_invertible(self):
        M = np.diag([1.0, 0.0])
        out = matrix_power_sym(M, -0.5)
        assert np.all(np.isfinite(out))
        with pytest.raises(np.linalg.LinAlgError):
            matrix_power_sym(M, -0.5, ZcaOptions(eigen_clamp=0.0))

    def test_solvers_agree(self, rng):
        A = rng.normal(size=(20, 20))
        M = A @ A.T
        a = matrix_power_sym(M, -0.5, ZcaOptions(eig_solver="jacobi"))
        b = matrix_power_sym(M, -0.5, ZcaOptions(eig_solver="lapack"))
        assert rel(a, b) <= 1e-9


class TestOptions:
    @pytest.mark.parametrize("kw", [{"eigen_clamp": -1}, {"std_epsilon": -1}, {"eig_solver": "qr"}])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            ZcaOptions(**kw)


class TestAdain:
    def test_identity(self, rng):
        F = rng.normal(size=(4, 30)) + 1
        np.testing.assert_allclose(adain(F, F), F, rtol=0, atol=1e-12 * np.abs(F).max())

    def test_constant_style(self, rng):
        Fs = np.repeat(np.array([[1.0], [-2.0]]), 9, axis=1)
        out = adain(rng.normal(size=(2, 5)), Fs)
        np.testing.assert_allclose(out, np.repeat([[1.0], [-2.0]], 5, axis=1), atol=1e-15)

    def test_stats_oracle(self, rng):
        Fc = rng.normal(size=(4, 50)) * 2 + 1
        Fs = rng.normal(size=(4, 70)) * 0.5 - 3
        out = adain(Fc, Fs)
        np.testing.assert_allclose(out.mean(axis=1), Fs.mean(axis=1), rtol=1e-9)
        np.testing.assert_allclose(out.std(axis=1), Fs.std(axis=1), rtol=1e-9)

    def test_ablated_matches_rms_not_mean(self, rng):
        Fc = rng.normal(size=(3, 40)) + 2
        Fs = rng.normal(size=(3, 60)) - 1
        out = adain_ablated(Fc, Fs)
        np.testing.assert_allclose(np.sqrt((out**2).mean(axis=1)), np.sqrt((Fs**2).mean(axis=1)), rtol=1e-12)
        assert np.all(np.sign(out.mean(axis=1)) != np.sign(Fs.mean(axis=1)))


class TestZca:
    def test_identity(self, rng):
        F = rng.normal(size=(5, 60)) + 0.5
        assert rel(zca(F, F), F) <= 1e-8

    def test_scalar_reduces_to_adain(self, rng):
        Fc = rng.normal(size=(1, 40)) * 3 + 1
        Fs = rng.normal(size=(1, 25)) * 0.2 - 4
        np.testing.assert_allclose(zca(Fc, Fs), adain(Fc, Fs), rtol=0, atol=1e-10)

    def test_covariance_oracle(self, rng):
        Fc = rng.normal(size=(5, 200))
        A = rng.normal(size=(5, 5))
        Fs = A @ rng.normal(size=(5, 300)) + rng.normal(size=(5, 1))
        out = zca(Fc, Fs)
        assert rel(np.cov(out, bias=True), np.cov(Fs, bias=True)) <= 1e-6
        np.testing.assert_allclose(out.mean(axis=1), Fs.mean(axis=1), rtol=1e-6, atol=1e-12)

    def test_gram_ablated_identity(self, rng):
        F = rng.normal(size=(4, 30)) + 1
        assert rel(zca_gram_ablated(F, F), F) <= 1e-8

    def test_gram_ablated_equals_zca_for_zero_means(self, rng):
        Fc, _ = centralize(rng.normal(size=(4, 80)))
        Fs, _ = centralize(rng.normal(size=(4, 90)) * 2)
        assert rel(zca_gram_ablated(Fc, Fs), zca(Fc, Fs)) <= 1e-8

    def test_gram_ablated_matches_gram_not_mean(self, rng):
        Fc = rng.normal(size=(4, 100)) + 1
        Fs = rng.normal(size=(4, 120)) - 2
        out = zca_gram_ablated(Fc, Fs)
        assert rel(gram(out), gram(Fs)) <= 1e-8
        assert np.linalg.norm(out.mean(axis=1) - Fs.mean(axis=1)) > 1e-3

    def test_rank_deficient_content_stays_finite(self, rng):
        Fc = rng.normal(size=(8, 4))
        out = zca(Fc, rng.normal(size=(8, 50)))
        assert np.all(np.isfinite(out))

    def test_channel_mismatch(self, rng):
        with pytest.raises(ValueError):
            zca(rng.normal(size=(3, 5)), rng.normal(size=(4, 5)))


class TestInterpolate:
    def test_endpoints(self, rng):
        A, B = rng.normal(size=(2, 3, 7))
        np.testing.assert_array_equal(interpolate(A, B, 1.0), A)
        np.testing.assert_array_equal(interpolate(A, B, 0.0), B)

    def test_half(self, rng):
        A, B = rng.normal(size=(2, 3, 7))
        np.testing.assert_allclose(interpolate(A, B, 0.5), (A + B) / 2, rtol=1e-15)

    @pytest.mark.parametrize("beta", [-0.1, 1.5])
    def test_rejects_beta(self, rng, beta):
        A = rng.normal(size=(2, 3))
        with pytest.raises(ValueError):
            interpolate(A, A, beta)

    def test_shape_mismatch(self, rng):
        with pytest.raises(ValueError):
            interpolate(rng.normal(size=(2, 3)), rng.normal(size=(2, 4)), 0.5)

    @given(st.floats(0, 1), st.floats(0, 1))
    @settings(max_examples=50, deadline=None)
    def test_composition(self, b1, b2):
        rng = np.random.default_rng(7)
        A, B = rng.normal(size=(2, 3, 6))
        twice = interpolate(interpolate(A, B, b1), B, b2)
        np.testing.assert_allclose(twice, interpolate(A, B, b1 * b2), atol=1e-13)
