"""Gaussian reward environments."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import InvalidInputError

# Per-cell sample means of the six-arm A/B test and its pooled noise level.
AB_TEST_MEANS = (0.0, -0.05, 0.15, 0.02, 0.28, 0.2)
SNR_SIGMA = {"high": 0.32, "medium": 0.64, "low": 1.28}


@dataclass(frozen=True)
class GaussianEnvironment:
    mu: tuple[float, ...]
    sigma: float

    def __post_init__(self) -> None:
        mu = tuple(float(m) for m in self.mu)
        if not mu or not all(np.isfinite(mu)):
            raise InvalidInputError("mu must be non-empty and finite")
        if not self.sigma >= 0.0:
            raise InvalidInputError(f"sigma must be non-negative, got {self.sigma}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def n_arms(self) -> int:
        return len(self.mu)

    @property
    def best_arm(self) -> int:
        return int(np.argmax(self.mu))


def sample_reward(env: GaussianEnvironment, arm: int, rng: np.random.Generator) -> float:
    if not 0 <= arm < env.n_arms:
        raise InvalidInputError(f"arm {arm} out of range for {env.n_arms} arms")
    return env.mu[arm] + env.sigma * float(rng.standard_normal())


def make_synthetic(
    n_arms: int,
    mean_variance: float,
    rng: np.random.Generator,
    *,
    sigma: float = 1.0,
    mean_scale: str = "variance",
) -> GaussianEnvironment:
    """Draw iid arm means from N(0, mean_variance); noise std is ``sigma``.

    ``mean_scale="std"`` reads ``mean_variance`` as a standard deviation instead.
    """
    if n_arms < 2:
        raise InvalidInputError("synthetic domains need at least two arms")
    if mean_variance < 0.0:
        raise InvalidInputError("mean_variance must be non-negative")
    if mean_scale == "variance":
        scale = np.sqrt(mean_variance)
    elif mean_scale == "std":
        scale = mean_variance
    else:
        raise InvalidInputError(f"unknown mean_scale {mean_scale!r}")
    mu = scale * rng.standard_normal(n_arms)
    return GaussianEnvironment(tuple(mu), sigma)


def make_semisynthetic(snr: str) -> GaussianEnvironment:
    try:
        sigma = SNR_SIGMA[snr]
    except KeyError:
        raise InvalidInputError(f"snr must be one of {sorted(SNR_SIGMA)}, got {snr!r}") from None
    return GaussianEnvironment(AB_TEST_MEANS, sigma)


def make_explicit(means: Sequence[float], sigma: float) -> GaussianEnvironment:
    return GaussianEnvironment(tuple(means), sigma)
