"""Domain types shared by policies and the harness.

Arms are 0-based integer indices. A :class:`History` keeps the K
initialization pulls apart from the loop steps; loop steps carry 1-based
indices ``t`` and the full propensity vector the decision was drawn from.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class InvalidInputError(ValueError):
    """Raised for empty or malformed numeric inputs."""


class CorruptHistoryError(ValueError):
    """Raised when a recorded history violates its invariants."""


class InvalidPropensityError(ValueError):
    """Raised when a propensity is outside (0, 1]."""


class InvalidBeliefError(ValueError):
    """Raised when a Gaussian belief has a non-positive variance."""


class InvalidObservationError(ValueError):
    """Raised when an observed reward is not finite."""


@dataclass(frozen=True, slots=True)
class ArmState:
    """Running pull count, mean and sum of squares for one arm."""

    n: int = 0
    mean: float = 0.0
    sum_sq: float = 0.0

    @property
    def sample_variance(self) -> float:
        """Unbiased sample variance of the observed rewards (0 when n < 2)."""
        if self.n < 2:
            return 0.0
        return max(self.sum_sq - self.n * self.mean**2, 0.0) / (self.n - 1)


def update_arm_state(state: ArmState, reward: float) -> ArmState:
    n = state.n + 1
    mean = (state.n * state.mean + reward) / n
    return ArmState(n=n, mean=mean, sum_sq=state.sum_sq + reward * reward)


@dataclass(frozen=True, slots=True)
class Decision:
    arm: int
    propensities: np.ndarray
    active: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.arm not in self.active:
            raise InvalidInputError(f"decision arm {self.arm} is not active {self.active}")


@dataclass(frozen=True, slots=True)
class StepRecord:
    """One loop step: 1-based index, choice, reward and decision-time context.

    ``propensities`` has length K with zeros on eliminated arms;
    ``baseline_means`` holds each arm's sample mean just before the pull.
    """

    t: int
    arm: int
    reward: float
    propensities: np.ndarray
    baseline_means: np.ndarray

    def validate(self, active: Iterable[int] | None = None, atol: float = 1e-9) -> None:
        p = self.propensities
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise CorruptHistoryError(f"step {self.t}: propensities outside [0, 1]")
        idx = list(active) if active is not None else np.flatnonzero(p > 0)
        if abs(float(np.sum(p[idx])) - 1.0) > atol:
            raise CorruptHistoryError(f"step {self.t}: active propensities do not sum to 1")
        if p[self.arm] <= 0.0:
            raise CorruptHistoryError(f"step {self.t}: chosen arm {self.arm} has zero propensity")


@dataclass
class History:
    """Per-episode log owned by a single runner."""

    n_arms: int
    init_pulls: list[tuple[int, float]] = field(default_factory=list)
    steps: list[StepRecord] = field(default_factory=list)
    arm_states: list[ArmState] = field(default_factory=list)
    active: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        if self.n_arms < 1:
            raise InvalidInputError("a history needs at least one arm")
        if not self.arm_states:
            self.arm_states = [ArmState() for _ in range(self.n_arms)]
        if not self.active:
            self.active = frozenset(range(self.n_arms))

    @property
    def n_pulls(self) -> int:
        return len(self.init_pulls) + len(self.steps)

    def sample_means(self) -> np.ndarray:
        return np.array([s.mean for s in self.arm_states])

    def record_initial(self, arm: int, reward: float) -> None:
        self.init_pulls.append((arm, reward))
        self.arm_states[arm] = update_arm_state(self.arm_states[arm], reward)

    def record(self, step: StepRecord, active_after: Iterable[int] | None = None) -> None:
        if step.t != len(self.steps) + 1:
            raise CorruptHistoryError(f"expected step {len(self.steps) + 1}, got {step.t}")
        step.validate(self.active)
        new_active = self.active
        if active_after is not None:
            new_active = frozenset(active_after)
            if not new_active:
                raise CorruptHistoryError("active set became empty")
            if not new_active <= self.active:
                raise CorruptHistoryError("eliminated arms cannot be reinstated")
        # validated in full before anything is mutated
        self.steps.append(step)
        self.arm_states[step.arm] = update_arm_state(self.arm_states[step.arm], step.reward)
        self.active = new_active


def cumulative_regret(mu: Sequence[float], arms: Sequence[int]) -> float:
    """Total gap between the best true mean and the means of the pulled arms."""
    mu = np.asarray(mu, dtype=float)
    if mu.size == 0:
        raise InvalidInputError("mu must be non-empty")
    arms = np.asarray(arms, dtype=int)
    if arms.size == 0:
        return 0.0
    if arms.min() < 0 or arms.max() >= mu.size:
        raise InvalidInputError("arm index out of range")
    gaps = mu.max() - mu
    return float(np.sum(gaps[arms]))


def regret_curve(mu: Sequence[float], arms: Sequence[int]) -> np.ndarray:
    """Cumulative regret after each pull."""
    mu = np.asarray(mu, dtype=float)
    gaps = mu.max() - mu
    return np.cumsum(gaps[np.asarray(arms, dtype=int)])

