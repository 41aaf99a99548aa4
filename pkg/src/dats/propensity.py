"""Probability that each Gaussian belief yields the largest sample.

Monte Carlo for any number of arms, closed form for a pair, and the
``(1 - gamma) * p + gamma / |A|`` floor mix that keeps every active arm
explorable.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.special import ndtr

from .core import InvalidBeliefError, InvalidInputError

DEFAULT_MC_SAMPLES = 10_000


def _check_beliefs(means: np.ndarray, variances: np.ndarray) -> None:
    if means.shape != variances.shape or means.ndim != 1 or means.size == 0:
        raise InvalidInputError("means and variances must be non-empty 1-d arrays of equal length")
    if not np.all(variances > 0.0):
        raise InvalidBeliefError("all belief variances must be positive")


def mc_winners(
    means: np.ndarray, variances: np.ndarray, n_samples: int, rng: np.random.Generator
) -> np.ndarray:
    """Index of the largest of one independent draw per belief, for each sample.

    Draws are ``mean + sd * z`` with one standard normal per (sample, arm);
    ties go to the lowest index. Means are shifted by their maximum before the
    single-precision arithmetic, so adding a constant to every mean leaves the
    result unchanged.
    """
    k = means.size
    z = rng.standard_normal((k, n_samples), dtype=np.float32)
    z *= np.sqrt(variances).astype(np.float32)[:, None]
    z += (means - means.max()).astype(np.float32)[:, None]
    # running max over arms; strict ">" keeps the lowest index on ties
    best = z[0].copy()
    winners = np.zeros(n_samples, dtype=np.intp)
    for a in range(1, k):
        winners[z[a] > best] = a
        np.maximum(best, z[a], out=best)
    return winners


def probability_of_optimality(
    means: Sequence[float],
    variances: Sequence[float],
    n_samples: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Monte Carlo estimate of P(arm is argmax) over the given beliefs."""
    means = np.asarray(means, dtype=float)
    variances = np.asarray(variances, dtype=float)
    _check_beliefs(means, variances)
    if n_samples < 1:
        raise InvalidInputError("n_samples must be >= 1")
    if means.size == 1:
        return np.ones(1)
    winners = mc_winners(means, variances, n_samples, rng)
    return counts_to_probabilities(np.bincount(winners, minlength=means.size), n_samples)


def counts_to_probabilities(counts: np.ndarray, n_samples: int) -> np.ndarray:
    p = counts / n_samples
    # absorb rounding into the largest entry so the vector sums to 1
    top = int(np.argmax(p))
    p[top] = 0.0
    p[top] = 1.0 - np.sum(p)
    return p


def two_arm_optimality(belief_a: tuple[float, float], belief_b: tuple[float, float]) -> float:
    """P(sample from belief_a > sample from belief_b) for Gaussian ``(mean, variance)`` pairs."""
    (ma, va), (mb, vb) = belief_a, belief_b
    if not (va > 0.0 and vb > 0.0):
        raise InvalidBeliefError("belief variances must be positive")
    return float(ndtr((ma - mb) / np.sqrt(va + vb)))


def pairwise_dominance(means: np.ndarray, variances: np.ndarray) -> np.ndarray:
    """Matrix ``P[a, b] = Phi((m_a - m_b) / sqrt(v_a + v_b))``."""
    diff = means[:, None] - means[None, :]
    scale = np.sqrt(variances[:, None] + variances[None, :])
    return ndtr(diff / scale)


def floor_mix(probs: Sequence[float], gamma: float) -> np.ndarray:
    if not 0.0 <= gamma < 1.0:
        raise InvalidInputError(f"gamma must be in [0, 1), got {gamma}")
    probs = np.asarray(probs, dtype=float)
    return (1.0 - gamma) * probs + gamma / probs.size
