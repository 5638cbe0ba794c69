"""Name-based dispatch over every transform, plus the per-model alpha presets."""

from __future__ import annotations

import numpy as np

from .classic import ZcaOptions, adain, adain_ablated, interpolate, zca, zca_gram_ablated
from .linesearch import ls_ft
from .objective import TransformConfig, iterft, modified_iterft
from .trace import ConvergenceTrace

ITERATIVE = {
    "iterft": iterft,
    "m-iterft": modified_iterft,
    "ls-ft": ls_ft,
}
CLOSED_FORM = {
    "adain": adain,
    "adain-ablated": adain_ablated,
    "zca": zca,
    "zca-gram": zca_gram_ablated,
}
METHODS = (*CLOSED_FORM, "interp", *ITERATIVE)

# alpha per style-transfer model, for LS-FT and for the fixed-step variants
ALPHA_PRESETS = {
    "wct2": {"ls-ft": 10.0, "m-iterft": 50.0},
    "photowct": {"ls-ft": 0.2, "m-iterft": 0.5},
    "photowct2": {"ls-ft": 1.0, "m-iterft": 2.0},
    "pca-d": {"ls-ft": 200.0, "m-iterft": 200.0},
}


def check_method(method: str) -> str:
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    return method


def preset_alpha(preset: str, method: str) -> float:
    if preset not in ALPHA_PRESETS:
        raise ValueError(f"unknown alpha preset {preset!r}; choose from {', '.join(ALPHA_PRESETS)}")
    table = ALPHA_PRESETS[preset]
    return table["ls-ft"] if method == "ls-ft" else table["m-iterft"]


def default_config(method: str, **overrides) -> TransformConfig:
    """Method-appropriate :class:`TransformConfig` (line search only for ``ls-ft``)."""
    if method == "ls-ft":
        return TransformConfig.line_search(**overrides)
    return TransformConfig(**overrides)


def apply(
    method: str,
    Fc,
    Fs,
    cfg: TransformConfig | None = None,
    *,
    zca_options: ZcaOptions = ZcaOptions(),
    beta: float = 1.0,
    interp_of: str = "zca",
    interp_base: np.ndarray | None = None,
) -> tuple[np.ndarray, ConvergenceTrace | None]:
    """Run ``method`` on a content/style pair; closed-form methods return no trace.

    ``interp`` blends ``interp_of``'s output with ``interp_base``
    (default: the content feature) using weight ``beta``.
    """
    check_method(method)
    if method in ITERATIVE:
        return ITERATIVE[method](Fc, Fs, cfg or default_config(method))
    if method == "interp":
        if interp_of == "interp":
            raise ValueError("interp cannot wrap itself")
        Ft, _ = apply(interp_of, Fc, Fs, cfg, zca_options=zca_options)
        base = Fc if interp_base is None else interp_base
        return interpolate(Ft, base, beta), None
    return CLOSED_FORM[method](Fc, Fs, zca_options), None
