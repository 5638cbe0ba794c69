"""Closed-form feature transforms: AdaIN, ZCA, their ablations and interpolation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .features import (
    centralize,
    check_feature,
    check_same_channels,
    check_same_shape,
    gram,
)


JACOBI_MAX_ORDER = 128


class EigDecomposition(NamedTuple):
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # column i pairs with eigenvalues[i]


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class ZcaOptions:
    """Regularisation knobs for the closed-form transforms.

    eigen_clamp
        Eigenvalues are floored at ``eigen_clamp * trace / C`` before any
        matrix power is taken.
    std_epsilon
        Added to the content variance inside the AdaIN square root.
    eig_solver
        ``"jacobi"`` (in-house :func:`sym_eig`), ``"lapack"``
        (``numpy.linalg.eigh``) or ``"auto"``, which uses Jacobi up to
        ``JACOBI_MAX_ORDER`` channels and LAPACK above.
    """

    eigen_clamp: float = 1e-8
    std_epsilon: float = 0.0
    eig_solver: str = "auto"

    def __post_init__(self):
        if self.eigen_clamp < 0 or self.std_epsilon < 0:
            raise ValueError("eigen_clamp and std_epsilon must be non-negative")
        if self.eig_solver not in ("auto", "jacobi", "lapack"):
            raise ValueError(f"unknown eig_solver {self.eig_solver!r}")


def _round_robin(m: int) -> list[tuple[np.ndarray, np.ndarray]]:
    # circle-method tournament: every index pair meets exactly once per sweep
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        p = np.array([players[i] for i in range(m // 2)])
        q = np.array([players[m - 1 - i] for i in range(m // 2)])
        rounds.append((p, q))
        players = [players[0], players[-1], *players[1:-1]]
    return rounds


def sym_eig(M, tol: float = 1e-12, max_sweeps: int = 100) -> EigDecomposition:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Rotations are applied in a fixed round-robin order; within one round
    the index pairs are disjoint, so a whole round is applied as a single
    vectorised update. Iteration stops once the off-diagonal Frobenius
    norm drops to ``tol`` times the diagonal Frobenius norm.
    """
    A = np.array(M, dtype=np.float64, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"sym_eig needs a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("sym_eig: non-finite entries")
    C = A.shape[0]
    A = 0.5 * (A + A.T)
    if C == 1:
        return EigDecomposition(A.diagonal().copy(), np.eye(1))
    Vt = np.eye(C)  # rows are eigenvectors

    m = C + (C % 2)
    rounds = []
    for p, q in _round_robin(m):
        keep = (p < C) & (q < C)  # drop the padding index for odd C
        rounds.append((p[keep], q[keep]))

    offdiag = ~np.eye(C, dtype=bool)

    def off_norm():
        return np.linalg.norm(A[offdiag])

    for _ in range(max_sweeps):
        off = off_norm()
        if off <= tol * np.linalg.norm(A.diagonal()):
            break
        for p, q in rounds:
            apq = A[p, q]
            app = A[p, p]
            aqq = A[q, q]
            t = np.zeros_like(apq)
            nz = apq != 0.0
            theta = (aqq[nz] - app[nz]) / (2.0 * apq[nz])
            sgn = np.where(theta >= 0.0, 1.0, -1.0)
            abs_theta = np.abs(theta)
            # for huge theta, t ~ 1/(2 theta); avoids overflow in theta**2
            big = abs_theta > 1e150
            t_nz = np.empty_like(theta)
            t_nz[big] = sgn[big] / (2.0 * abs_theta[big])
            th = abs_theta[~big]
            t_nz[~big] = sgn[~big] / (th + np.sqrt(th * th + 1.0))
            t[nz] = t_nz
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            # A <- J^T A J as two row rotations: (J^T (J^T A)^T) since A is symmetric
            for _ in range(2):
                rp, rq = A[p, :], A[q, :]
                A[p, :], A[q, :] = c[:, None] * rp - s[:, None] * rq, s[:, None] * rp + c[:, None] * rq
                A = np.ascontiguousarray(A.T)
            vp, vq = Vt[p, :], Vt[q, :]
            Vt[p, :], Vt[q, :] = c[:, None] * vp - s[:, None] * vq, s[:, None] * vp + c[:, None] * vq
    else:
        off = off_norm()
        if off > tol * np.linalg.norm(A.diagonal()):
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal residual {off:.3e})"
            )

    w = A.diagonal().copy()
    order = np.argsort(-w, kind="stable")
    return EigDecomposition(w[order], Vt[order, :].T.copy())


def _eig(M, opts: ZcaOptions) -> EigDecomposition:
    solver = opts.eig_solver
    if solver == "auto":
        solver = "jacobi" if M.shape[0] <= JACOBI_MAX_ORDER else "lapack"
    if solver == "lapack":
        w, V = np.linalg.eigh(0.5 * (M + M.T))
        return EigDecomposition(w[::-1], V[:, ::-1])
    return sym_eig(M)


def matrix_power_sym(M, p: float, opts: ZcaOptions = ZcaOptions()) -> np.ndarray:
    """``V diag(max(w, floor)^p) V^T`` with ``floor = eigen_clamp * tr(M) / C``."""
    M = np.asarray(M, dtype=np.float64)
    w, V = _eig(M, opts)
    floor = opts.eigen_clamp * max(np.trace(M), 0.0) / M.shape[0]
    w = np.maximum(w, floor)
    if p < 0 and np.any(w <= 0.0):
        raise np.linalg.LinAlgError(
            "singular matrix: cannot take a negative power without an eigenvalue clamp"
        )
    return (V * w**p) @ V.T


def adain(Fc, Fs, opts: ZcaOptions = ZcaOptions()) -> np.ndarray:
    """Match per-channel mean and (population) standard deviation."""
    Fc = check_feature(Fc, "content")
    Fs = check_feature(Fs, "style")
    check_same_channels(Fc, Fs)
    Fc_bar, _ = centralize(Fc)
    Fs_bar, mu_s = centralize(Fs)
    var_c = np.mean(Fc_bar**2, axis=1) + opts.std_epsilon
    sigma_s = np.sqrt(np.mean(Fs_bar**2, axis=1))
    scale = np.divide(sigma_s, np.sqrt(var_c), out=np.zeros_like(sigma_s), where=var_c > 0)
    return scale[:, None] * Fc_bar + mu_s[:, None]


def adain_ablated(Fc, Fs, opts: ZcaOptions = ZcaOptions()) -> np.ndarray:
    """AdaIN without centering: match per-channel root-mean-square, no mean shift."""
    Fc = check_feature(Fc, "content")
    Fs = check_feature(Fs, "style")
    check_same_channels(Fc, Fs)
    ms_c = np.mean(Fc**2, axis=1) + opts.std_epsilon
    rms_s = np.sqrt(np.mean(Fs**2, axis=1))
    scale = np.divide(rms_s, np.sqrt(ms_c), out=np.zeros_like(rms_s), where=ms_c > 0)
    return scale[:, None] * Fc


def coloring_matrix(G_content, G_style, opts: ZcaOptions = ZcaOptions()) -> np.ndarray:
    """``G_style^{1/2} G_content^{-1/2}``, the whitening-then-colouring map."""
    return matrix_power_sym(G_style, 0.5, opts) @ matrix_power_sym(G_content, -0.5, opts)


def zca(Fc, Fs, opts: ZcaOptions = ZcaOptions()) -> np.ndarray:
    """Whitening/colouring transform on centered features.

    The output has the style's mean and (1/n-normalised) covariance when
    both covariances are full rank.
    """
    Fc = check_feature(Fc, "content")
    Fs = check_feature(Fs, "style")
    check_same_channels(Fc, Fs)
    Fc_bar, _ = centralize(Fc)
    Fs_bar, mu_s = centralize(Fs)
    T = coloring_matrix(gram(Fc_bar), gram(Fs_bar), opts)
    return T @ Fc_bar + mu_s[:, None]


def zca_gram_ablated(Fc, Fs, opts: ZcaOptions = ZcaOptions()) -> np.ndarray:
    """ZCA on raw features with Gram matrices in place of covariances.

    Grams of output and style agree; their means generally do not.
    """
    Fc = check_feature(Fc, "content")
    Fs = check_feature(Fs, "style")
    check_same_channels(Fc, Fs)
    return coloring_matrix(gram(Fc), gram(Fs), opts) @ Fc


def interpolate(Ft, Fbase, beta: float) -> np.ndarray:
    """``beta * Ft + (1 - beta) * Fbase``."""
    Ft = check_feature(Ft, "transformed")
    Fbase = check_feature(Fbase, "base")
    check_same_shape(Ft, Fbase, ("transformed", "base"))
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    return beta * Ft + (1.0 - beta) * Fbase
