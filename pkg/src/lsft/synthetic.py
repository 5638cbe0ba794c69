"""Seeded synthetic feature matrices standing in for network activations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import derive_seed, normal_stream


@dataclass(frozen=True)
class Dist:
    """Generator distribution.

    ``kind`` is ``"unit-gaussian"``, ``"scaled-gaussian"`` (entries
    ``mu + sigma * z``) or ``"low-rank"`` (``A @ B / sqrt(rank)`` with
    ``A`` of shape ``(C, rank)`` drawn first, then ``B`` of shape
    ``(rank, n)``, both standard normal, row-major).
    """

    kind: str = "unit-gaussian"
    mu: float = 0.0
    sigma: float = 1.0
    rank: int = 1

    @classmethod
    def parse(cls, text: str) -> "Dist":
        """Parse ``unit-gaussian``, ``scaled-gaussian:MU,SIGMA`` or ``low-rank:R``."""
        name, _, args = text.partition(":")
        if name == "unit-gaussian" and not args:
            return cls()
        if name == "scaled-gaussian":
            try:
                mu, sigma = (float(x) for x in args.split(","))
            except ValueError:
                raise ValueError(f"expected scaled-gaussian:MU,SIGMA, got {text!r}") from None
            return cls("scaled-gaussian", mu=mu, sigma=sigma)
        if name == "low-rank":
            try:
                return cls("low-rank", rank=int(args))
            except ValueError:
                raise ValueError(f"expected low-rank:R, got {text!r}") from None
        raise ValueError(f"unknown distribution {text!r}")

    def __str__(self) -> str:
        if self.kind == "scaled-gaussian":
            return f"scaled-gaussian:{self.mu!r},{self.sigma!r}"
        if self.kind == "low-rank":
            return f"low-rank:{self.rank}"
        return self.kind


def gen_features(seed: int, C: int, n: int, dist: Dist | str = "unit-gaussian") -> np.ndarray:
    """Deterministic ``(C, n)`` feature matrix for ``(seed, shape, dist)``."""
    if isinstance(dist, str):
        dist = Dist.parse(dist)
    if C < 1 or n < 1:
        raise ValueError(f"invalid feature shape ({C}, {n})")
    if dist.kind == "unit-gaussian":
        return normal_stream(seed, C * n).reshape(C, n)
    if dist.kind == "scaled-gaussian":
        return dist.mu + dist.sigma * normal_stream(seed, C * n).reshape(C, n)
    if dist.kind == "low-rank":
        r = dist.rank
        if not 1 <= r <= C:
            raise ValueError(f"low-rank needs 1 <= rank <= C, got rank={r}, C={C}")
        z = normal_stream(seed, C * r + r * n)
        A = z[: C * r].reshape(C, r)
        B = z[C * r :].reshape(r, n)
        return (A @ B) / np.sqrt(r)
    raise ValueError(f"unknown distribution kind {dist.kind!r}")


def gen_pair(seed: int, C: int, n_content: int, n_style: int) -> tuple[np.ndarray, np.ndarray]:
    """A content/style pair with distinct first- and second-order statistics.

    Content is unit Gaussian. Style is a low-rank correlated component
    (rank ``max(1, C // 8)``) plus scaled Gaussian noise with a nonzero
    mean, so its Gram matrix and mean both differ from the content's.
    """
    Fc = gen_features(derive_seed(seed, 0), C, n_content)
    rank = max(1, C // 8)
    Fs = gen_features(derive_seed(seed, 1), C, n_style, Dist("low-rank", rank=rank))
    Fs += gen_features(derive_seed(seed, 2), C, n_style, Dist("scaled-gaussian", mu=0.5, sigma=0.5))
    return Fc, Fs
