"""scikit-learn style wrappers around the functional transforms.

Orientation follows scikit-learn: ``X`` has one row per spatial sample and
one column per channel, i.e. it is the transpose of the ``(C, n)`` feature
matrices used everywhere else in the package. ``fit`` takes the style
feature and ``transform`` maps a content feature onto it::

    est = LineSearchFeatureTransform(alpha=1.0).fit(style.T)
    stylized = est.transform(content.T).T
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .classic import ZcaOptions, adain, adain_ablated, zca, zca_gram_ablated
from .features import centralize, gram
from .linesearch import ls_ft
from .objective import TransformConfig, iterft, modified_iterft


class _StyleFitted(TransformerMixin, BaseEstimator):
    """Shared fit/validation logic; subclasses implement ``_transform(Fc)``."""

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_min_samples=1)
        self._style = np.ascontiguousarray(X.T)
        Fs_bar, mu = centralize(self._style)
        self.style_mean_ = mu
        self.style_gram_ = gram(Fs_bar)
        self.n_features_in_ = X.shape[1]
        self.n_style_samples_ = X.shape[0]
        return self

    def transform(self, X):
        check_is_fitted(self, "style_gram_")
        X = check_array(X, dtype=np.float64, ensure_min_samples=1)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} channels, but {type(self).__name__} was fitted with {self.n_features_in_}"
            )
        return self._transform(np.ascontiguousarray(X.T)).T

    def _transform(self, Fc):  # pragma: no cover - abstract
        raise NotImplementedError


class _Iterative(_StyleFitted):
    def _config(self) -> TransformConfig:
        raise NotImplementedError

    def _run(self, Fc, Fs, cfg):
        raise NotImplementedError

    def _transform(self, Fc):
        Ft, self.trace_ = self._run(Fc, self._style, self._config())
        return Ft


class LineSearchFeatureTransform(_Iterative):
    """Gradient steps on the centered content/Gram objective with exact line search.

    ``trace_`` holds the convergence trace of the last ``transform`` call.
    """

    def __init__(self, alpha=1.0, lam=None, iterations=1, recenter=True):
        self.alpha = alpha
        self.lam = lam
        self.iterations = iterations
        self.recenter = recenter

    def _config(self):
        return TransformConfig.line_search(
            alpha=self.alpha, lam=self.lam, iterations=self.iterations, recenter_each_step=self.recenter
        )

    def _run(self, Fc, Fs, cfg):
        return ls_ft(Fc, Fs, cfg)


class ModifiedIterFT(_Iterative):
    """Fixed-step descent on centered features; the style mean is added back."""

    def __init__(self, alpha=2.0, lam=None, eta=0.01, iterations=15, recenter=True):
        self.alpha = alpha
        self.lam = lam
        self.eta = eta
        self.iterations = iterations
        self.recenter = recenter

    def _config(self):
        return TransformConfig(
            alpha=self.alpha, lam=self.lam, eta=self.eta, iterations=self.iterations, recenter_each_step=self.recenter
        )

    def _run(self, Fc, Fs, cfg):
        return modified_iterft(Fc, Fs, cfg)


class IterFT(_Iterative):
    """Fixed-step descent on raw, uncentered features."""

    def __init__(self, alpha=1.0, lam=None, eta=0.01, iterations=15):
        self.alpha = alpha
        self.lam = lam
        self.eta = eta
        self.iterations = iterations

    def _config(self):
        return TransformConfig(alpha=self.alpha, lam=self.lam, eta=self.eta, iterations=self.iterations)

    def _run(self, Fc, Fs, cfg):
        return iterft(Fc, Fs, cfg)


class AdaIN(_StyleFitted):
    """Per-channel mean/std matching; ``ablated=True`` matches the RMS only."""

    def __init__(self, ablated=False, epsilon=0.0):
        self.ablated = ablated
        self.epsilon = epsilon

    def _transform(self, Fc):
        fn = adain_ablated if self.ablated else adain
        return fn(Fc, self._style, ZcaOptions(std_epsilon=self.epsilon))


class ZCA(_StyleFitted):
    """Whitening/coloring with centered covariances; ``gram_only`` uses raw Gram matrices."""

    def __init__(self, gram_only=False, eigen_clamp=1e-8, eig_solver="auto"):
        self.gram_only = gram_only
        self.eigen_clamp = eigen_clamp
        self.eig_solver = eig_solver

    def _transform(self, Fc):
        opts = ZcaOptions(eigen_clamp=self.eigen_clamp, eig_solver=self.eig_solver)
        fn = zca_gram_ablated if self.gram_only else zca
        return fn(Fc, self._style, opts)


__all__ = ["AdaIN", "IterFT", "LineSearchFeatureTransform", "ModifiedIterFT", "ZCA"]
