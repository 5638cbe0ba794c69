"""Per-iteration records produced by the iterative transforms."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class LossBreakdown:
    """Objective value split into its content and (un-weighted) style parts."""

    total: float
    content_part: float
    style_part: float
    lam: float

    @classmethod
    def from_parts(cls, content_part: float, style_part: float, lam: float) -> "LossBreakdown":
        # NaN passes through on purpose so divergence shows up in the trace
        if content_part < 0 or style_part < 0 or lam < 0:
            raise ValueError(f"loss parts must be non-negative, got {content_part}, {style_part}, lam={lam}")
        return cls(content_part + lam * style_part, content_part, style_part, lam)


@dataclass(frozen=True)
class IterationRecord:
    loss: LossBreakdown
    eta: float | None  # None when no step was taken
    wall_time: float  # seconds since the transform started


@dataclass
class ConvergenceTrace:
    method: str
    layer: str = ""
    seed: int | None = None
    initial_loss: LossBreakdown | None = None
    records: list[IterationRecord] = field(default_factory=list)
    converged_at: int | None = None
    error: str | None = None

    def __len__(self) -> int:
        return len(self.records)

    @property
    def losses(self) -> np.ndarray:
        return np.array([r.loss.total for r in self.records])

    @property
    def etas(self) -> list[float]:
        return [r.eta for r in self.records if r.eta is not None]

    @property
    def final_loss(self) -> float:
        if self.records:
            return self.records[-1].loss.total
        if self.initial_loss is not None:
            return self.initial_loss.total
        return float("nan")


class DivergenceError(FloatingPointError):
    """An iterate became non-finite; carries the partial trace."""

    def __init__(self, iteration: int, trace: ConvergenceTrace):
        super().__init__(f"{trace.method}: non-finite loss at iteration {iteration}")
        self.iteration = iteration
        self.trace = trace
