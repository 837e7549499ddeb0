"""Scalar fitness: weighted predictive metrics plus budget-violation penalties."""

from __future__ import annotations

from dataclasses import dataclass

from .resources import ResourceEstimate


@dataclass(frozen=True)
class EvalMetrics:
    """Accuracy, precision, and recall, each in [0, 1]."""

    accuracy: float
    precision: float
    recall: float

    def __post_init__(self) -> None:
        for name in ("accuracy", "precision", "recall"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")


@dataclass(frozen=True)
class Constraints:
    """Device memory budget in bytes."""

    max_ram_bytes: int
    max_flash_bytes: int

    def __post_init__(self) -> None:
        if self.max_ram_bytes <= 0 or self.max_flash_bytes <= 0:
            raise ValueError("constraints must be positive")


@dataclass(frozen=True)
class FitnessWeights:
    """Per-term weights; the equal default of 1/5 makes a perfect feasible score 1.0."""

    w1: float = 0.2  # accuracy
    w2: float = 0.2  # precision
    w3: float = 0.2  # recall
    w4: float = 0.2  # RAM penalty
    w5: float = 0.2  # flash penalty

    def __post_init__(self) -> None:
        for name in ("w1", "w2", "w3", "w4", "w5"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


DEFAULT_WEIGHTS = FitnessWeights()


def violations(estimate: ResourceEstimate, constraints: Constraints) -> tuple[int, int]:
    """Excess RAM and flash usage in bytes (0 when within budget)."""
    return (
        max(0, estimate.ram_bytes - constraints.max_ram_bytes),
        max(0, estimate.flash_bytes - constraints.max_flash_bytes),
    )


def fitness(
    metrics: EvalMetrics,
    estimate: ResourceEstimate,
    constraints: Constraints,
    weights: FitnessWeights = DEFAULT_WEIGHTS,
) -> float:
    """w1*a + w2*p + w3*r + w4*(1 - v_r/x_r) + w5*(1 - v_f/x_f).

    Penalty terms are unclamped: gross violators can go negative, while a
    fully feasible candidate collects the full w4 + w5. Summation starts
    with the penalty terms; this order keeps the equal-weight reference
    values (1.0 / 0.4 / 0.68) exact in double precision.
    """
    v_r, v_f = violations(estimate, constraints)
    return (
        weights.w4 * (1 - v_r / constraints.max_ram_bytes)
        + weights.w5 * (1 - v_f / constraints.max_flash_bytes)
        + weights.w1 * metrics.accuracy
        + weights.w2 * metrics.precision
        + weights.w3 * metrics.recall
    )
