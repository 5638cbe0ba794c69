"""Line-search feature transforms for style transfer, with baselines and a benchmark harness.

Feature matrices are ``(C, n)`` float64 arrays: one row per channel, one
column per spatial sample.
"""

from ._version import __version__
from .classic import ConvergenceError, ZcaOptions, adain, adain_ablated, interpolate, sym_eig, zca, zca_gram_ablated
from .estimators import ZCA, AdaIN, IterFT, LineSearchFeatureTransform, ModifiedIterFT
from .features import centralize, decentralize, frobenius_sq, gram, reshape_feature, trace_product
from .ftz import FtzError, read_ftz, write_ftz
from .linesearch import (
    CubicCoefficients,
    DegenerateGradientError,
    LineSearchError,
    NoPositiveRootError,
    cubic_coefficients,
    line_search_step,
    ls_ft,
    select_step,
    solve_cubic,
)
from .methods import ALPHA_PRESETS, apply, default_config, preset_alpha
from .objective import TransformConfig, gradient, iterft, modified_iterft, resolve_lambda, total_loss
from .synthetic import gen_features, gen_pair
from .trace import ConvergenceTrace, DivergenceError, IterationRecord, LossBreakdown

__all__ = [
    "ALPHA_PRESETS",
    "AdaIN",
    "ConvergenceError",
    "ConvergenceTrace",
    "CubicCoefficients",
    "DegenerateGradientError",
    "DivergenceError",
    "FtzError",
    "IterFT",
    "IterationRecord",
    "LineSearchError",
    "LineSearchFeatureTransform",
    "LossBreakdown",
    "ModifiedIterFT",
    "NoPositiveRootError",
    "TransformConfig",
    "ZCA",
    "ZcaOptions",
    "__version__",
    "adain",
    "adain_ablated",
    "apply",
    "centralize",
    "cubic_coefficients",
    "decentralize",
    "default_config",
    "frobenius_sq",
    "gen_features",
    "gen_pair",
    "gradient",
    "gram",
    "interpolate",
    "iterft",
    "line_search_step",
    "ls_ft",
    "modified_iterft",
    "preset_alpha",
    "read_ftz",
    "reshape_feature",
    "resolve_lambda",
    "select_step",
    "solve_cubic",
    "sym_eig",
    "total_loss",
    "trace_product",
    "write_ftz",
    "zca",
    "zca_gram_ablated",
]
