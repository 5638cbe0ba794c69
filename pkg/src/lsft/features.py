"""Feature matrices and the statistics every transformation is built from.

A feature matrix is a ``(C, n)`` float64 array: one row per channel, one
column per spatial sample. Mean vectors are length-``C`` arrays and Gram /
covariance matrices are ``(C, C)`` symmetric arrays. Everything here is a
pure function of its inputs.
"""

from __future__ import annotations

import numpy as np


def check_feature(F, name: str = "feature") -> np.ndarray:
    """Validate ``F`` as a ``(C, n)`` feature matrix and return it as float64.

    Raises ``ValueError`` for wrong dimensionality, empty axes or
    non-finite entries.
    """
    arr = np.asarray(F, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name}: expected a 2-D (channels, samples) matrix, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name}: channels and samples must be >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        bad = int(np.size(arr) - np.count_nonzero(np.isfinite(arr)))
        raise ValueError(f"{name}: {bad} non-finite entries (NaN/Inf)")
    return arr


def check_same_channels(A: np.ndarray, B: np.ndarray, names=("content", "style")) -> None:
    if A.shape[0] != B.shape[0]:
        raise ValueError(
            f"channel mismatch: {names[0]} has {A.shape[0]} channels, {names[1]} has {B.shape[0]}"
        )


def check_same_shape(A: np.ndarray, B: np.ndarray, names=("a", "b")) -> None:
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch: {names[0]} {A.shape} vs {names[1]} {B.shape}")


def reshape_feature(tensor) -> np.ndarray:
    """Flatten a ``(C, H, W)`` activation tensor to ``(C, H*W)``.

    Row ``i`` is channel ``i`` read in row-major order (H outer, W inner).
    """
    arr = np.asarray(tensor, dtype=np.float64)
    if arr.ndim != 3 or min(arr.shape) < 1:
        raise ValueError(f"expected a (C, H, W) tensor with positive sizes, got shape {arr.shape}")
    C, H, W = arr.shape
    return check_feature(arr.reshape(C, H * W), "tensor")


def mean_vector(F: np.ndarray) -> np.ndarray:
    """Per-channel mean across the sample columns."""
    return np.asarray(F, dtype=np.float64).mean(axis=1)


def centralize(F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(F - mu, mu)`` with ``mu`` the per-channel mean."""
    F = np.asarray(F, dtype=np.float64)
    mu = F.mean(axis=1)
    return F - mu[:, None], mu


def decentralize(F_bar: np.ndarray, mu) -> np.ndarray:
    """Add a mean vector back to every column of a centered feature."""
    mu = np.asarray(mu, dtype=np.float64)
    if mu.ndim != 1 or mu.shape[0] != F_bar.shape[0]:
        raise ValueError(
            f"mean vector of length {mu.shape} does not match {F_bar.shape[0]} channels"
        )
    return F_bar + mu[:, None]


def gram(F: np.ndarray, divisor: int | float | None = None) -> np.ndarray:
    """``(1/divisor) F F^T``; ``divisor`` defaults to the sample count.

    The divisor is explicit because the content and style terms of the
    objective are normalised by their own sample counts.
    """
    if divisor is None:
        divisor = F.shape[1]
    if divisor <= 0:
        raise ValueError(f"gram divisor must be positive, got {divisor}")
    # numpy dispatches F @ F.T to a symmetric rank-k update
    G = F @ F.T
    G /= divisor
    return G


def trace_product(A: np.ndarray, B: np.ndarray) -> float:
    """``tr[A B]`` without forming the product."""
    if A.ndim != 2 or A.shape != B.T.shape:
        raise ValueError(f"trace_product needs A (p, q) and B (q, p), got {A.shape} and {B.shape}")
    return float(np.einsum("ij,ji->", A, B))


def frobenius_sq(M: np.ndarray) -> float:
    """Sum of squared entries."""
    flat = np.ravel(M)
    return float(np.dot(flat, flat))
