"""Content/Gram objective, its gradient, and fixed-step feature descent.

The objective for a transformed feature ``Ft`` is

    ||Ft - Fc||^2 + lam * ||Ft Ft^T / n_c - Fs Fs^T / n_s||^2

with squared Frobenius norms. :func:`iterft` minimises it on raw
features; :func:`modified_iterft` works on centered features and adds the
style mean back at the end.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.linalg import blas

from .features import (
    centralize,
    check_feature,
    check_same_channels,
    check_same_shape,
    frobenius_sq,
    gram,
)
from .rng import normal_stream
from .trace import ConvergenceTrace, DivergenceError, IterationRecord, LossBreakdown

FIXED = "fixed"
LINE_SEARCH = "line-search"


@dataclass(frozen=True)
class GradientBundle:
    D: np.ndarray  # d loss / d Ft, same shape as Ft
    S: np.ndarray  # Ft Ft^T / n_c - Fs Fs^T / n_s


@dataclass(frozen=True)
class TransformConfig:
    """Settings shared by the iterative transforms.

    ``lam`` fixes the style weight explicitly; when it is ``None`` the
    weight is resolved from ``alpha`` (see :func:`resolve_lambda`).
    ``iterations=None`` means the method default (15 for fixed-step
    descent, 1 with line search). ``convergence_grad_tol`` is relative to
    ``1 + ||Fc_bar||``; ``None`` picks the method default. With
    ``early_stop=False`` a negligible gradient produces a no-step record
    instead of ending the run, so traces always have ``iterations`` records.
    ``perturb_scale > 0`` starts from the content feature plus centered
    noise of that relative size.
    """

    alpha: float = 1.0
    lam: float | None = None
    eta_mode: str = FIXED
    eta: float = 0.01
    iterations: int | None = None
    recenter_each_step: bool = True
    convergence_grad_tol: float | None = None
    early_stop: bool = True
    perturb_scale: float = 0.0
    perturb_seed: int = 0

    def __post_init__(self):
        if self.lam is not None and self.lam < 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.eta_mode not in (FIXED, LINE_SEARCH):
            raise ValueError(f"eta_mode must be {FIXED!r} or {LINE_SEARCH!r}, got {self.eta_mode!r}")
        if self.eta_mode == FIXED and not self.eta > 0:
            raise ValueError(f"fixed eta must be > 0, got {self.eta}")
        if self.iterations is not None and self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.convergence_grad_tol is not None and self.convergence_grad_tol < 0:
            raise ValueError("convergence_grad_tol must be >= 0")
        if self.perturb_scale < 0:
            raise ValueError("perturb_scale must be >= 0")

    @classmethod
    def line_search(cls, **kwargs) -> "TransformConfig":
        return cls(eta_mode=LINE_SEARCH, **kwargs)

    def with_(self, **kwargs) -> "TransformConfig":
        return replace(self, **kwargs)


def _check_triple(Ft, Fc, Fs):
    Ft = check_feature(Ft, "transformed")
    Fc = check_feature(Fc, "content")
    Fs = check_feature(Fs, "style")
    check_same_shape(Ft, Fc, ("transformed", "content"))
    check_same_channels(Fc, Fs)
    return Ft, Fc, Fs


def total_loss(Ft, Fc, Fs, lam: float) -> LossBreakdown:
    """Evaluate the objective; callers pass centered features for the modified variant."""
    Ft, Fc, Fs = _check_triple(Ft, Fc, Fs)
    S = gram(Ft, Ft.shape[1]) - gram(Fs, Fs.shape[1])
    return LossBreakdown.from_parts(frobenius_sq(Ft - Fc), frobenius_sq(S), lam)


def gradient(Ft, Fc, Fs, lam: float) -> GradientBundle:
    """``D = 2 (Ft - Fc) + (4 lam / n_c) S Ft`` together with ``S``."""
    Ft, Fc, Fs = _check_triple(Ft, Fc, Fs)
    n_c = Ft.shape[1]
    S = gram(Ft, n_c) - gram(Fs, Fs.shape[1])
    return GradientBundle(2.0 * (Ft - Fc) + (4.0 * lam / n_c) * (S @ Ft), S)


def resolve_lambda(Fc_bar, Fs_bar, alpha: float) -> float:
    """``alpha * ||Fc_bar||^2 / ||Fs_bar Fs_bar^T / n_s||^2``."""
    Fc_bar = np.asarray(Fc_bar, dtype=np.float64)
    Fs_bar = np.asarray(Fs_bar, dtype=np.float64)
    return _lambda_from_gram(Fc_bar, gram(Fs_bar), alpha)


def _lambda_from_gram(Fc_bar: np.ndarray, G_style: np.ndarray, alpha: float) -> float:
    denom = frobenius_sq(G_style)
    if denom == 0.0:
        raise ValueError("cannot resolve lambda: the style Gram matrix is zero")
    return alpha * frobenius_sq(Fc_bar) / denom


def _initial_iterate(F: np.ndarray, cfg: TransformConfig) -> np.ndarray:
    Ft = F.copy()
    if cfg.perturb_scale > 0:
        noise = normal_stream(cfg.perturb_seed, F.size).reshape(F.shape)
        noise -= noise.mean(axis=1, keepdims=True)
        scale = np.sqrt(frobenius_sq(F) / F.size) or 1.0
        Ft += cfg.perturb_scale * scale * noise
    return Ft


# Called with keywords Ft, diff, D, S, lam, n_c, loss, iteration; returns the step size.
StepRule = Callable[..., float]


def descend(
    Fc: np.ndarray,
    G_style: np.ndarray,
    lam: float,
    cfg: TransformConfig,
    step_rule: StepRule,
    *,
    method: str,
    iterations: int,
    grad_tol: float,
    recenter: bool,
) -> tuple[np.ndarray, ConvergenceTrace]:
    """Run gradient descent on the objective from ``Fc`` (optionally perturbed).

    ``G_style`` is the normalised style Gram matrix. Returns the final
    iterate (not decentralised) and its trace. The Gram matrix of each new
    iterate is shared between the recorded loss and the next gradient.
    """
    t0 = time.perf_counter()
    trace = ConvergenceTrace(method=method)
    n_c = Fc.shape[1]
    Ft = _initial_iterate(Fc, cfg)
    S = gram(Ft, n_c) - G_style
    diff = Ft - Fc
    loss = LossBreakdown.from_parts(frobenius_sq(diff), frobenius_sq(S), lam)
    trace.initial_loss = loss
    threshold = grad_tol * (1.0 + np.sqrt(frobenius_sq(Fc)))

    for k in range(iterations):
        D = (S * (4.0 * lam / n_c)) @ Ft
        _axpy(2.0, diff, D)
        if np.sqrt(frobenius_sq(D)) <= threshold:
            if trace.converged_at is None:
                trace.converged_at = k
            if cfg.early_stop:
                break
            trace.records.append(IterationRecord(loss, None, time.perf_counter() - t0))
            continue
        eta = step_rule(Ft=Ft, diff=diff, D=D, S=S, lam=lam, n_c=n_c, loss=loss, iteration=k)
        _axpy(-eta, D, Ft)
        if recenter:
            Ft -= Ft.mean(axis=1, keepdims=True)
        S = gram(Ft, n_c) - G_style
        np.subtract(Ft, Fc, out=diff)
        loss = LossBreakdown.from_parts(frobenius_sq(diff), frobenius_sq(S), lam)
        trace.records.append(IterationRecord(loss, float(eta), time.perf_counter() - t0))
        if not np.isfinite(loss.total):
            trace.error = f"non-finite loss at iteration {k + 1}"
            raise DivergenceError(k + 1, trace)
    return Ft, trace


def _axpy(alpha: float, x: np.ndarray, y: np.ndarray) -> None:
    """In-place ``y += alpha * x`` for C-contiguous float64 arrays of equal shape."""
    if x.flags.c_contiguous and y.flags.c_contiguous:
        blas.daxpy(x.ravel(), y.ravel(), a=alpha)
    else:
        y += alpha * x


def _fixed_step(eta: float) -> StepRule:
    def rule(**_):
        return eta

    return rule


def _require_fixed(cfg: TransformConfig, name: str) -> None:
    if cfg.eta_mode != FIXED:
        raise ValueError(f"{name} uses a fixed learning rate; got eta_mode={cfg.eta_mode!r}")


def iterft(Fc, Fs, cfg: TransformConfig | None = None) -> tuple[np.ndarray, ConvergenceTrace]:
    """Fixed-step descent on raw (uncentered) features.

    Starts from ``Fc``; with ``cfg.lam`` unset the weight is resolved
    from ``alpha`` using the raw features. The trace reports the raw
    objective. Raises :class:`DivergenceError` if the iterates blow up.
    """
    cfg = cfg or TransformConfig()
    _require_fixed(cfg, "iterft")
    Fc = check_feature(Fc, "content")
    Fs = check_feature(Fs, "style")
    check_same_channels(Fc, Fs)
    G_style = gram(Fs)
    lam = cfg.lam if cfg.lam is not None else _lambda_from_gram(Fc, G_style, cfg.alpha)
    iters = 15 if cfg.iterations is None else cfg.iterations
    tol = 1e-12 if cfg.convergence_grad_tol is None else cfg.convergence_grad_tol
    with np.errstate(over="ignore", invalid="ignore"):
        Ft, trace = descend(
            Fc, G_style, lam, cfg, _fixed_step(cfg.eta),
            method="iterft", iterations=iters, grad_tol=tol, recenter=False,
        )
    return Ft, trace


def modified_iterft(Fc, Fs, cfg: TransformConfig | None = None) -> tuple[np.ndarray, ConvergenceTrace]:
    """Centralize, run fixed-step descent on the centered objective, decentralize.

    The result is ``Ft_bar + mean(Fs)``.
    """
    cfg = cfg or TransformConfig()
    _require_fixed(cfg, "modified_iterft")
    Fc = check_feature(Fc, "content")
    Fs = check_feature(Fs, "style")
    check_same_channels(Fc, Fs)
    Fc_bar, mu_c = centralize(Fc)
    Fs_bar, mu_s = centralize(Fs)
    G_style = gram(Fs_bar)
    lam = cfg.lam if cfg.lam is not None else _lambda_from_gram(Fc_bar, G_style, cfg.alpha)
    iters = 15 if cfg.iterations is None else cfg.iterations
    tol = 1e-12 if cfg.convergence_grad_tol is None else cfg.convergence_grad_tol
    with np.errstate(over="ignore", invalid="ignore"):
        Ft, trace = descend(
            Fc_bar, G_style, lam, cfg, _fixed_step(cfg.eta),
            method="m-iterft", iterations=iters, grad_tol=tol, recenter=cfg.recenter_each_step,
        )
    return shift_to_style_mean(Ft, Fc, mu_c, mu_s, trace, cfg), trace


def shift_to_style_mean(Ft_bar, Fc, mu_c, mu_s, trace: ConvergenceTrace, cfg: TransformConfig) -> np.ndarray:
    """Decentralize the final iterate with the style mean.

    When no step was taken the result is formed as ``Fc + (mu_s - mu_c)``,
    which is the same value without the rounding of a centralize/decentralize
    round trip (so identical content and style come back bit for bit).
    """
    if cfg.perturb_scale == 0 and all(r.eta is None for r in trace.records):
        return Fc + (mu_s - mu_c)[:, None]
    Ft_bar += mu_s[:, None]
    return Ft_bar
