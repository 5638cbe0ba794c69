"""Exact line search along the negative gradient, and the LS-FT transform.

Along the ray ``Ft - eta * D`` the centered objective is a quartic in
``eta`` whose derivative is ``2 (a eta^3 + b eta^2 + c eta + d)``. The
coefficients only need ``D2 = D D^T`` and ``DF = D Ft^T`` (both C x C),
so the exact step costs two extra products per iteration. With
``lam > 0`` and ``D != 0`` the product of the cubic's roots, ``-d / a``,
is positive, so a positive root always exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .features import centralize, check_feature, check_same_channels, gram, trace_product
from .objective import (
    LINE_SEARCH,
    TransformConfig,
    _lambda_from_gram,
    descend,
    shift_to_style_mean,
    total_loss,
)
from .trace import ConvergenceTrace

# |a| below this fraction of the other coefficients is treated as zero
LEADING_COEF_EPS = 1e-14
DEFAULT_GRAD_TOL = 1e-10


class DegenerateGradientError(ValueError):
    pass


class NoPositiveRootError(ArithmeticError):
    pass


class LineSearchError(RuntimeError):
    def __init__(self, iteration: int, cause: Exception):
        super().__init__(f"line search failed at iteration {iteration}: {cause}")
        self.iteration = iteration
        self.cause = cause


@dataclass(frozen=True)
class CubicCoefficients:
    a: float
    b: float
    c: float
    d: float
    tr_D2: float = 0.0
    tr_D2D2: float = 0.0
    tr_DF_D2: float = 0.0
    tr_D2S: float = 0.0
    tr_DFDF: float = 0.0
    tr_DFDFt: float = 0.0

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    def __call__(self, eta):
        """Evaluate the cubic (half the directional derivative) at ``eta``."""
        return ((self.a * eta + self.b) * eta + self.c) * eta + self.d


@dataclass(frozen=True)
class StepResult:
    eta: float
    phi_before: float
    phi_after: float
    real_roots: list[float] = field(default_factory=list)
    positive_roots_considered: list[float] = field(default_factory=list)


def cubic_coefficients(D, Ft, S, lam: float, n_c: int) -> CubicCoefficients:
    """Coefficients of the stationarity cubic for the step along ``-D``.

    ``S`` is ``Ft Ft^T / n_c - Fs Fs^T / n_s`` at the current iterate.
    """
    D = np.asarray(D, dtype=np.float64)
    Ft = np.asarray(Ft, dtype=np.float64)
    D2 = D @ D.T
    DF = D @ Ft.T
    tr_D2 = float(np.trace(D2))
    tr_D2D2 = trace_product(D2, D2)
    tr_DF_D2 = trace_product(DF, D2)
    tr_D2S = trace_product(D2, S)
    tr_DFDF = trace_product(DF, DF)
    tr_DFDFt = trace_product(DF, DF.T)
    k1 = 2.0 * lam / n_c
    k2 = 2.0 * lam / n_c**2
    return CubicCoefficients(
        a=k2 * tr_D2D2,
        b=-3.0 * k2 * tr_DF_D2,
        c=tr_D2 + k1 * tr_D2S + k2 * (tr_DFDF + tr_DFDFt),
        d=-0.5 * tr_D2,
        tr_D2=tr_D2,
        tr_D2D2=tr_D2D2,
        tr_DF_D2=tr_DF_D2,
        tr_D2S=tr_D2S,
        tr_DFDF=tr_DFDF,
        tr_DFDFt=tr_DFDFt,
    )


def phi(eta: float, Ft, Fc, Fs, D, lam: float) -> float:
    """Objective at ``Ft - eta * D`` by direct evaluation."""
    return total_loss(np.asarray(Ft) - eta * np.asarray(D), Fc, Fs, lam).total


def quartic_coefficients(coeffs: CubicCoefficients, phi0: float) -> np.ndarray:
    """Power-basis coefficients ``[e0, e1, e2, e3, e4]`` of the objective along the ray.

    Integrates ``2 * cubic`` from ``phi(0) = phi0``; valid when ``D`` is
    the gradient at the current iterate.
    """
    a, b, c, d = coeffs.as_tuple()
    return np.array([phi0, 2.0 * d, c, 2.0 * b / 3.0, a / 2.0])


def _polish(r: float, a: float, b: float, c: float, d: float, steps: int = 3) -> float:
    # Newton steps, kept only while the residual shrinks
    f = ((a * r + b) * r + c) * r + d
    for _ in range(steps):
        if f == 0.0:
            break
        fp = (3.0 * a * r + 2.0 * b) * r + c
        if fp == 0.0 or not math.isfinite(fp):
            break
        r2 = r - f / fp
        f2 = ((a * r2 + b) * r2 + c) * r2 + d
        if not abs(f2) < abs(f):
            break
        r, f = r2, f2
    return r


def _solve_quadratic(a: float, b: float, c: float) -> list[float]:
    if abs(a) <= LEADING_COEF_EPS * max(abs(b), abs(c)):
        return [] if b == 0.0 else [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    roots = [q / a]
    if q != 0.0:
        roots.append(c / q)
    return roots


def _residual(r: float, a: float, b: float, c: float, d: float) -> float:
    norm = abs(a) * abs(r) ** 3 + abs(b) * r * r + abs(c) * abs(r) + abs(d)
    f = abs(((a * r + b) * r + c) * r + d)
    return f / norm if norm > 0.0 else f


def _deflate(roots: list[float], a: float, b: float, c: float, d: float, tol: float) -> list[float]:
    # (x - R)(a x^2 + b1 x + e1) with R the largest root. b1 = b + aR cancels
    # when the other roots are small; b1 = (e1 - c)/R with e1 = -d/R does not.
    R = _polish(max(roots, key=abs), a, b, c, d)
    candidates = [[_polish(r, a, b, c, d) for r in roots]]
    if R != 0.0:
        b1 = b + a * R
        e1 = -d / R
        for bb, ee in ((b1, c + R * b1), ((e1 - c) / R, e1)):
            quad = [_polish(r, a, b, c, d) for r in _solve_quadratic(a, bb, ee)]
            candidates.append([R, *quad])

    def score(rs):
        res = [_residual(r, a, b, c, d) for r in rs]
        return (-sum(x <= tol for x in res), max(res))

    return min(candidates, key=score)


def solve_cubic(coeffs, tol: float = 1e-9) -> list[float]:
    """Real roots of ``a x^3 + b x^2 + c x + d``, ascending.

    Uses the depressed cubic: Cardano for one real root, the
    trigonometric form for three. The two smaller roots are then re-derived
    from the quadratic left after dividing out the largest one, which keeps
    clustered or tiny roots accurate. Each root is polished by up to three
    Newton steps. A negligible leading coefficient falls back to the
    quadratic or linear equation. ``tol`` is the normalised residual a root
    must meet when choosing between candidate root sets.
    """
    a, b, c, d = (
        coeffs.as_tuple() if isinstance(coeffs, CubicCoefficients) else map(float, coeffs)
    )
    if max(abs(a), abs(b), abs(c), abs(d)) == 0.0:
        raise DegenerateGradientError("degenerate gradient: all cubic coefficients are zero")

    if abs(a) <= LEADING_COEF_EPS * max(abs(b), abs(c), abs(d)):
        roots = _solve_quadratic(b, c, d)
    elif d == 0.0:
        # exact root at zero; deflate instead of resolving it to rounding noise
        roots = [0.0, *_solve_quadratic(a, b, c)]
    else:
        B, C, Dd = b / a, c / a, d / a
        shift = B / 3.0
        p = C - B * B / 3.0
        q = 2.0 * B**3 / 27.0 - B * C / 3.0 + Dd
        disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
        if disc > 0.0:
            u = np.cbrt(-q / 2.0 - math.copysign(math.sqrt(disc), q))
            t = u - p / (3.0 * u) if u != 0.0 else 0.0
            roots = [float(t) - shift]
        elif p >= 0.0 or p * math.sqrt(-p / 3.0) == 0.0:
            # p >= 0 with disc <= 0 only happens through underflow
            roots = [float(np.cbrt(-q)) - shift]
        else:
            m = 2.0 * math.sqrt(-p / 3.0)
            arg = min(1.0, max(-1.0, 3.0 * q / (p * m)))
            theta = math.acos(arg) / 3.0
            roots = [m * math.cos(theta - 2.0 * math.pi * k / 3.0) - shift for k in range(3)]
        roots = _deflate(roots, a, b, c, d, tol)

    roots = sorted(_polish(r, a, b, c, d) for r in roots)
    out: list[float] = []
    for r in roots:
        if out and abs(r - out[-1]) <= 1e-12 * (1.0 + abs(r)):
            continue
        out.append(r)
    return out


def select_step(roots: Sequence[float], phi_fn: Callable[[float], float], coeffs=None) -> StepResult:
    """Pick the positive root with the lowest objective value."""
    positive = [float(r) for r in roots if r > 0.0]
    if not positive:
        detail = f" (coefficients {coeffs.as_tuple()})" if coeffs is not None else ""
        raise NoPositiveRootError(f"no positive root among {list(roots)}{detail}")
    values = [phi_fn(r) for r in positive]
    best = int(np.argmin(values))
    return StepResult(
        eta=positive[best],
        phi_before=float(phi_fn(0.0)),
        phi_after=float(values[best]),
        real_roots=[float(r) for r in roots],
        positive_roots_considered=positive,
    )


def line_search_step(Ft, D, S, lam: float, n_c: int, phi0: float) -> StepResult:
    """Exact step for the current iterate, with the quartic evaluated in closed form."""
    coeffs = cubic_coefficients(D, Ft, S, lam, n_c)
    quartic = quartic_coefficients(coeffs, phi0)[::-1]
    roots = solve_cubic(coeffs)
    return select_step(roots, lambda eta: float(np.polyval(quartic, eta)), coeffs)


def ls_ft(Fc, Fs, cfg: TransformConfig | None = None, *, steps: list | None = None):
    """Line-search feature transform.

    Centralizes both features, starts from the centered content, takes
    exact line-search gradient steps (one by default), and adds the style
    mean back. Pass a list as ``steps`` to collect the :class:`StepResult`
    of every iteration.

    Returns ``(Ft, trace)``.
    """
    cfg = cfg or TransformConfig.line_search()
    if cfg.eta_mode != LINE_SEARCH:
        raise ValueError(f"ls_ft needs eta_mode={LINE_SEARCH!r}, got {cfg.eta_mode!r}")
    Fc = check_feature(Fc, "content")
    Fs = check_feature(Fs, "style")
    check_same_channels(Fc, Fs)
    Fc_bar, mu_c = centralize(Fc)
    Fs_bar, mu_s = centralize(Fs)
    G_style = gram(Fs_bar)
    lam = cfg.lam if cfg.lam is not None else _lambda_from_gram(Fc_bar, G_style, cfg.alpha)
    iters = 1 if cfg.iterations is None else cfg.iterations
    tol = DEFAULT_GRAD_TOL if cfg.convergence_grad_tol is None else cfg.convergence_grad_tol

    def rule(Ft, D, S, lam, n_c, loss, iteration, **_):
        try:
            result = line_search_step(Ft, D, S, lam, n_c, loss.total)
        except (DegenerateGradientError, NoPositiveRootError) as exc:
            raise LineSearchError(iteration + 1, exc) from exc
        if steps is not None:
            steps.append(result)
        return result.eta

    Ft, trace = descend(
        Fc_bar, G_style, lam, cfg, rule,
        method="ls-ft", iterations=iters, grad_tol=tol, recenter=cfg.recenter_each_step,
    )
    return shift_to_style_mean(Ft, Fc, mu_c, mu_s, trace, cfg), trace
