"""Mean-reward estimators for adaptively collected bandit data.

All estimators work on the per-step efficient score

    score_s = baseline_s + 1(a_s = a) * (r_s - baseline_s) / pi_s

where ``baseline_s`` is the arm's sample mean before step ``s`` and ``pi_s``
the propensity with which the arm could have been chosen. The adaptively
weighted estimator (ADR) averages scores with weights ``sqrt(pi_s)``; DR uses
uniform weights, IPW drops the baseline.

:class:`ScoreAccumulator` maintains the sufficient statistics of these
estimators in O(1) per step, with compensated summation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import CorruptHistoryError, History, InvalidInputError, InvalidPropensityError


@dataclass(frozen=True)
class ScoreSeries:
    """Efficient scores and matching propensities for one arm."""

    scores: np.ndarray
    propensities: np.ndarray

    def __post_init__(self) -> None:
        scores = np.asarray(self.scores, dtype=float)
        props = np.asarray(self.propensities, dtype=float)
        if scores.shape != props.shape or scores.ndim != 1:
            raise InvalidInputError("scores and propensities must be 1-d and equally long")
        if np.any(props <= 0.0) or np.any(props > 1.0):
            raise InvalidPropensityError("propensities must lie in (0, 1]")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "propensities", props)

    def __len__(self) -> int:
        return self.scores.size


@dataclass(frozen=True, slots=True)
class ArmEstimate:
    mean: float
    variance: float


def efficient_score(baseline_mean: float, chosen: bool, reward: float, propensity: float) -> float:
    if not propensity > 0.0:
        raise InvalidPropensityError(f"propensity must be positive, got {propensity}")
    if not chosen:
        return baseline_mean
    return baseline_mean + (reward - baseline_mean) / propensity


def ipw_estimate(history: History, arm: int, t: int) -> float:
    """Inverse-propensity-weighted mean of ``arm`` over the first ``t`` loop steps.

    The sum is divided by ``t`` (all steps), not by the number of pulls.
    """
    if t < 1:
        raise InvalidInputError("t must be >= 1")
    if len(history.steps) < t:
        raise InvalidInputError(f"history has {len(history.steps)} loop steps, need {t}")
    total = 0.0
    for step in history.steps[:t]:
        if step.arm != arm:
            continue
        p = step.propensities[arm]
        if p <= 0.0:
            raise CorruptHistoryError(f"step {step.t}: arm {arm} chosen with propensity {p}")
        total += step.reward / p
    return total / t


def dr_estimate(scores: ScoreSeries) -> float:
    if len(scores) == 0:
        raise InvalidInputError("empty score series")
    return float(np.mean(scores.scores))


def adr_estimate(scores: ScoreSeries) -> float:
    if len(scores) == 0:
        raise InvalidInputError("empty score series")
    w = np.sqrt(scores.propensities)
    return float(np.sum(w * scores.scores) / np.sum(w))


def adr_variance(scores: ScoreSeries, mean: float) -> float:
    """Sampling variance of the ADR mean, including the +1 exploration floor.

    ``sum(pi * ((score - mean)**2 + 1)) / sum(sqrt(pi))**2``
    """
    if len(scores) == 0:
        raise InvalidInputError("empty score series")
    p = scores.propensities
    resid = scores.scores - mean
    return float(np.sum(p * (resid * resid + 1.0)) / np.sum(np.sqrt(p)) ** 2)


def uniform_variance(scores: np.ndarray, mean: float) -> float:
    """Uniform-weight analogue of :func:`adr_variance` used by TS-IPW and TS-DR."""
    scores = np.asarray(scores, dtype=float)
    if scores.size == 0:
        raise InvalidInputError("empty score series")
    resid = scores - mean
    return float(np.sum(resid * resid + 1.0) / scores.size**2)


def clipped_series(
    baselines: Sequence[float],
    chosen: Sequence[bool],
    rewards: Sequence[float],
    propensities: Sequence[float],
    gamma: float,
) -> ScoreSeries:
    """Recompute scores with every propensity replaced by ``max(gamma, pi)``."""
    if not 0.0 < gamma < 1.0:
        raise InvalidInputError(f"gamma must be in (0, 1), got {gamma}")
    b = np.asarray(baselines, dtype=float)
    c = np.asarray(chosen, dtype=bool)
    r = np.asarray(rewards, dtype=float)
    p = np.maximum(np.asarray(propensities, dtype=float), gamma)
    scores = b + np.where(c, (r - b) / p, 0.0)
    return ScoreSeries(scores, p)


def score_series(
    history: History,
    arm: int,
    t: int | None = None,
    gamma: float | None = None,
    kind: str = "dr",
) -> ScoreSeries:
    """Build the score series of ``arm`` from a recorded history.

    Without ``gamma`` only steps where the arm had positive propensity (it was
    still active) contribute. With ``gamma`` every step contributes, using the
    clipped propensity. ``kind="ipw"`` drops the baseline term.
    """
    steps = history.steps if t is None else history.steps[:t]
    baselines, chosen, rewards, props = [], [], [], []
    for step in steps:
        p = float(step.propensities[arm])
        if gamma is None and p <= 0.0:
            continue
        baselines.append(float(step.baseline_means[arm]) if kind == "dr" else 0.0)
        chosen.append(step.arm == arm)
        rewards.append(step.reward)
        props.append(p)
    if gamma is not None:
        return clipped_series(baselines, chosen, rewards, props, gamma)
    b = np.asarray(baselines, dtype=float)
    c = np.asarray(chosen, dtype=bool)
    r = np.asarray(rewards, dtype=float)
    p = np.asarray(props, dtype=float)
    if np.any(c & (p <= 0.0)):
        raise CorruptHistoryError(f"arm {arm} chosen with zero propensity")
    scores = b + np.where(c, (r - b) / np.where(p > 0, p, 1.0), 0.0)
    return ScoreSeries(scores, p)


class _CompensatedSum:
    """Vectorised Neumaier summation over a fixed number of lanes."""

    __slots__ = ("s", "c")

    def __init__(self, n: int) -> None:
        self.s = np.zeros(n)
        self.c = np.zeros(n)

    def add(self, x: np.ndarray, mask: np.ndarray) -> None:
        x = np.where(mask, x, 0.0)
        s = self.s
        t = s + x
        self.c += np.where(np.abs(s) >= np.abs(x), (s - t) + x, (x - t) + s)
        self.s = t

    @property
    def value(self) -> np.ndarray:
        return self.s + self.c


class ScoreAccumulator:
    """Running sufficient statistics for weighted score estimators, per arm.

    With per-step weight ``w`` (``sqrt(pi)`` for ADR, 1 for DR/IPW) it keeps
    ``sum w``, ``sum w*score``, ``sum w^2``, ``sum w^2*score`` and
    ``sum w^2*score^2``; mean and variance follow without rescanning::

        mean = sum(w*score) / sum(w)
        var  = (sum(w^2 (score - mean)^2) + sum(w^2)) / sum(w)^2
    """

    def __init__(self, n_arms: int) -> None:
        self.n_arms = n_arms
        self._w = _CompensatedSum(n_arms)
        self._wg = _CompensatedSum(n_arms)
        self._w2 = _CompensatedSum(n_arms)
        self._w2g = _CompensatedSum(n_arms)
        self._w2g2 = _CompensatedSum(n_arms)
        self.count = np.zeros(n_arms, dtype=np.int64)

    def add(self, scores: np.ndarray, weights: np.ndarray, mask: np.ndarray) -> None:
        w2 = weights * weights
        self._w.add(weights, mask)
        self._wg.add(weights * scores, mask)
        self._w2.add(w2, mask)
        self._w2g.add(w2 * scores, mask)
        self._w2g2.add(w2 * scores * scores, mask)
        self.count += mask

    def estimates(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(means, variances)``; arms without data get ``(0, inf)``."""
        sw = self._w.value
        has = self.count > 0
        safe = np.where(has, sw, 1.0)
        mean = np.where(has, self._wg.value / safe, 0.0)
        w2 = self._w2.value
        centered = self._w2g2.value - 2.0 * mean * self._w2g.value + mean * mean * w2
        var = np.where(has, (np.maximum(centered, 0.0) + w2) / (safe * safe), np.inf)
        return mean, var
