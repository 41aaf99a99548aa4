"""Bandit policies behind a common ``decide`` / ``observe`` contract.

Every policy is driven the same way by the harness::

    for arm in range(K):
        policy.observe_initial(arm, reward)
    for t in loop steps:
        decision = policy.decide(t, rng)
        policy.observe(decision, reward)

``t`` is the 1-based index of the pull on the unified axis (initialization
pulls included). Policies keep their own arm statistics in numpy arrays.

Causal policies (DATS, DATS-clipping, TS-IPW, TS-DR) draw the arm from the
logged propensity vector, so the propensities used by the estimators are the
true sampling probabilities.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Iterable

import numpy as np

from .core import ArmState, Decision, InvalidInputError, InvalidObservationError
from .estimators import ScoreAccumulator
from .propensity import (
    DEFAULT_MC_SAMPLES,
    counts_to_probabilities,
    floor_mix,
    mc_winners,
    pairwise_dominance,
    probability_of_optimality,
)

POLICY_KINDS = ("ts_normal", "ucb_normal", "dats", "dats_clipping", "ts_ipw", "ts_dr", "uniform")
CAUSAL_KINDS = ("dats", "dats_clipping", "ts_ipw", "ts_dr")
DEFAULT_GAMMA = {"dats": 0.01, "ts_ipw": 0.01, "ts_dr": 0.01, "dats_clipping": 0.001}
DEFAULT_BETAS = (1.0, 1.5, 2.0, 2.5, 3.0, 4.0)


@dataclass(frozen=True)
class PolicySpec:
    """Declarative policy description.

    ``noise_sigma=None`` means "use the environment's sigma" (TS-Normal and the
    uniform policy's stopping diagnostics). ``mc_samples=0`` switches off the
    uniform policy's posterior diagnostics.
    """

    kind: str
    gamma: float | None = None
    beta: float | None = None
    prior_mean: float = 0.0
    prior_variance: float = 1e6
    noise_sigma: float | None = None
    mc_samples: int = DEFAULT_MC_SAMPLES
    ucb_variance: str = "standard"
    ucb_exploration: str = "min2"

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise InvalidInputError(f"kind: unknown policy kind {self.kind!r}")
        if self.kind in DEFAULT_GAMMA:
            if self.gamma is None:
                object.__setattr__(self, "gamma", DEFAULT_GAMMA[self.kind])
            if not 0.0 < self.gamma < 1.0:
                raise InvalidInputError(f"gamma: must be in (0, 1), got {self.gamma}")
        elif self.gamma is not None:
            raise InvalidInputError(f"gamma: not a parameter of {self.kind}")
        if self.kind == "ucb_normal":
            if self.beta is None:
                raise InvalidInputError("beta: required for ucb_normal")
            if not self.beta >= 0.0:
                raise InvalidInputError(f"beta: must be non-negative, got {self.beta}")
            if self.ucb_variance not in ("standard", "linear_mean"):
                raise InvalidInputError(f"ucb_variance: unknown variant {self.ucb_variance!r}")
            if self.ucb_exploration not in ("min2", "auer"):
                raise InvalidInputError(f"ucb_exploration: unknown rule {self.ucb_exploration!r}")
        elif self.beta is not None:
            raise InvalidInputError(f"beta: not a parameter of {self.kind}")
        if not self.prior_variance > 0.0:
            raise InvalidInputError("prior_variance: must be positive")
        if self.noise_sigma is not None and not self.noise_sigma > 0.0:
            raise InvalidInputError("noise_sigma: must be positive")
        min_mc = 0 if self.kind in ("uniform", "ucb_normal") else 1
        if self.mc_samples < min_mc:
            raise InvalidInputError(f"mc_samples: must be >= {min_mc}")

    @property
    def label(self) -> str:
        return self.kind

    def with_(self, **changes) -> "PolicySpec":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


def ts_posterior(
    prior: tuple[float, float], noise_variance: float, n, sample_mean
) -> tuple:
    """Normal-Normal conjugate posterior ``(mean, variance)`` from a fixed prior.

    Works elementwise on arrays; entries with ``n == 0`` return the prior.
    """
    prior_mean, prior_var = prior
    n_arr = np.asarray(n, dtype=float)
    safe_n = np.where(n_arr > 0, n_arr, 1.0)
    noise_over_n = noise_variance / safe_n
    denom = prior_var + noise_over_n
    mean = (np.asarray(sample_mean, dtype=float) * prior_var + prior_mean * noise_over_n) / denom
    var = prior_var * noise_over_n / denom
    mean = np.where(n_arr > 0, mean, prior_mean)
    var = np.where(n_arr > 0, var, prior_var)
    if mean.ndim == 0:
        return float(mean), float(var)
    return mean, var


def _ucb_variance(n, mean, sum_sq, variant: str):
    n = np.asarray(n, dtype=float)
    mean = np.asarray(mean, dtype=float)
    sum_sq = np.asarray(sum_sq, dtype=float)
    # linear_mean subtracts n * mean rather than n * mean^2
    centered = sum_sq - n * mean * mean if variant == "standard" else sum_sq - n * mean
    with np.errstate(divide="ignore", invalid="ignore"):
        var = centered / (n * (n - 1.0))
    return np.maximum(var, 0.0)


def ucb_index(state: ArmState, t: int, beta: float, variant: str = "standard") -> float:
    """``mean + beta * sqrt(var_of_mean * log(t - 1))``; needs ``t >= 3`` and ``n >= 2``."""
    if t < 3 or state.n < 2:
        raise InvalidInputError("ucb_index needs t >= 3 and n >= 2 (use forced exploration before)")
    var = float(_ucb_variance(state.n, state.mean, state.sum_sq, variant))
    return state.mean + beta * math.sqrt(var * math.log(t - 1))


def eliminate(
    means: np.ndarray,
    variances: np.ndarray,
    horizon: int,
    arms: Iterable[int] | None = None,
) -> set[int]:
    """Arms dominated by some other arm with probability below ``1 / horizon``.

    The comparison excludes the arm itself; the arm with the largest mean is
    never returned since its dominance probabilities are all >= 0.5.
    """
    means = np.asarray(means, dtype=float)
    variances = np.asarray(variances, dtype=float)
    arms = list(range(means.size)) if arms is None else list(arms)
    if means.size < 2:
        return set()
    if horizon < 2:
        raise InvalidInputError("horizon must be >= 2")
    dom = pairwise_dominance(means, variances)
    np.fill_diagonal(dom, np.inf)
    worst = dom.min(axis=1)
    return {arms[i] for i in np.flatnonzero(worst < 1.0 / horizon)}


class Policy:
    """Shared arm bookkeeping; subclasses implement ``decide``/``observe``."""

    kind = "base"

    def __init__(self, spec: PolicySpec, n_arms: int, horizon: int, mc_rng: np.random.Generator):
        if n_arms < 1:
            raise InvalidInputError("need at least one arm")
        self.spec = spec
        self.n_arms = n_arms
        self.horizon = horizon
        self.mc_rng = mc_rng
        self.n = np.zeros(n_arms, dtype=np.int64)
        self.mean = np.zeros(n_arms)
        self.sum_sq = np.zeros(n_arms)
        self.active = np.ones(n_arms, dtype=bool)
        self.eliminated_at = np.full(n_arms, -1, dtype=np.int64)

    def arm_state(self, arm: int) -> ArmState:
        return ArmState(int(self.n[arm]), float(self.mean[arm]), float(self.sum_sq[arm]))

    def active_arms(self) -> tuple[int, ...]:
        return tuple(int(a) for a in np.flatnonzero(self.active))

    def _update(self, arm: int, reward: float) -> None:
        if not math.isfinite(reward):
            raise InvalidObservationError(f"reward must be finite, got {reward}")
        n = self.n[arm]
        self.mean[arm] = (n * self.mean[arm] + reward) / (n + 1)
        self.n[arm] = n + 1
        self.sum_sq[arm] += reward * reward

    def observe_initial(self, arm: int, reward: float) -> None:
        self._update(arm, reward)

    def decide(self, t: int, rng: np.random.Generator) -> Decision:
        raise NotImplementedError

    def observe(self, decision: Decision, reward: float) -> None:
        self._update(decision.arm, reward)

    def stopping_probabilities(self) -> np.ndarray | None:
        """Probability of optimality behind the latest decision (length K), if defined."""
        return None

    def beliefs(self) -> tuple[np.ndarray, np.ndarray]:
        """Current sampling distribution ``(means, variances)`` over all arms."""
        raise NotImplementedError


class UniformPolicy(Policy):
    """Fixed uniform assignment, i.e. a classic A/B/n test.

    Stopping diagnostics use the TS-Normal posterior of the collected data.
    """

    kind = "uniform"

    def __init__(self, spec, n_arms, horizon, mc_rng, noise_sigma: float):
        super().__init__(spec, n_arms, horizon, mc_rng)
        self.noise_variance = noise_sigma**2
        self._props = np.full(n_arms, 1.0 / n_arms)
        self._stop = None

    def beliefs(self):
        return ts_posterior(
            (self.spec.prior_mean, self.spec.prior_variance), self.noise_variance, self.n, self.mean
        )

    def decide(self, t, rng):
        arm = min(int(rng.random() * self.n_arms), self.n_arms - 1)
        if self.spec.mc_samples > 0:
            means, variances = self.beliefs()
            self._stop = probability_of_optimality(means, variances, self.spec.mc_samples, self.mc_rng)
        return Decision(arm, self._props.copy(), tuple(range(self.n_arms)))

    def stopping_probabilities(self):
        return self._stop


class UCBNormal(Policy):
    kind = "ucb_normal"

    def beliefs(self):
        return self.mean.copy(), _ucb_variance(self.n, self.mean, self.sum_sq, self.spec.ucb_variance)

    def indices(self, t: int) -> np.ndarray:
        var = _ucb_variance(self.n, self.mean, self.sum_sq, self.spec.ucb_variance)
        return self.mean + self.spec.beta * np.sqrt(var * math.log(max(t - 1, 1)))

    def decide(self, t, rng):
        need = 2
        if self.spec.ucb_exploration == "auer" and t > 1:
            need = max(2, math.ceil(8.0 * math.log(t)))
        forced = np.flatnonzero(self.n < need)
        if forced.size:
            arm = int(forced[0])
        else:
            arm = int(np.argmax(self.indices(t)))
        props = np.zeros(self.n_arms)
        props[arm] = 1.0
        return Decision(arm, props, tuple(range(self.n_arms)))


class TSNormal(Policy):
    """Thompson sampling with a Normal prior and known noise variance.

    ``decide`` draws ``mc_samples`` joint posterior samples; the first one is
    the Thompson sample that picks the arm and all of them estimate the
    probability of optimality used for stopping.
    """

    kind = "ts_normal"

    def __init__(self, spec, n_arms, horizon, mc_rng, noise_sigma: float):
        super().__init__(spec, n_arms, horizon, mc_rng)
        self.noise_variance = noise_sigma**2
        self._stop = None

    def beliefs(self):
        return ts_posterior(
            (self.spec.prior_mean, self.spec.prior_variance), self.noise_variance, self.n, self.mean
        )

    def decide(self, t, rng):
        means, variances = self.beliefs()
        winners = mc_winners(means, variances, self.spec.mc_samples, rng)
        props = counts_to_probabilities(np.bincount(winners, minlength=self.n_arms), winners.size)
        self._stop = props
        return Decision(int(winners[0]), props, tuple(range(self.n_arms)))

    def stopping_probabilities(self):
        return self._stop


class CausalTS(Policy):
    """Thompson sampling on bias-corrected estimates with logged propensities.

    ========= ============= ============ ============ ===========
    kind      score          weights     elimination  floor mix
    ========= ============= ============ ============ ===========
    dats      DR score       sqrt(pi)    yes          yes
    ts_dr     DR score       uniform     yes          yes
    ts_ipw    IPW term       uniform     yes          yes
    dats_clip DR, max(g,pi)  sqrt(max)   no           no
    ========= ============= ============ ============ ===========
    """

    def __init__(self, spec, n_arms, horizon, mc_rng):
        super().__init__(spec, n_arms, horizon, mc_rng)
        self.kind = spec.kind
        self.gamma = spec.gamma
        self.clip = spec.kind == "dats_clipping"
        self.adaptive_weights = spec.kind in ("dats", "dats_clipping")
        self.ipw = spec.kind == "ts_ipw"
        self.acc = ScoreAccumulator(n_arms)
        self.mu_hat = np.zeros(n_arms)
        self.var_hat = np.full(n_arms, np.inf)
        self.props = np.full(n_arms, 1.0 / n_arms)
        self.poptimality = np.full(n_arms, 1.0 / n_arms)
        self.steps = 0

    def beliefs(self):
        return self.mu_hat.copy(), self.var_hat.copy()

    def decide(self, t, rng):
        cdf = np.cumsum(self.props)
        arm = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
        active = self.active_arms()
        if arm >= self.n_arms or not self.active[arm]:
            arm = active[-1]
        return Decision(arm, self.props.copy(), active)

    def stopping_probabilities(self):
        return self.poptimality

    def observe(self, decision, reward):
        if not math.isfinite(reward):
            raise InvalidObservationError(f"reward must be finite, got {reward}")
        arm = decision.arm
        mask = self.active.copy()
        pi = decision.propensities
        p_eff = np.maximum(pi, self.gamma) if self.clip else np.where(mask, pi, 1.0)
        chosen = np.zeros(self.n_arms, dtype=bool)
        chosen[arm] = True
        if self.ipw:
            scores = np.where(chosen, reward / p_eff, 0.0)
        else:
            baseline = self.mean
            scores = baseline + np.where(chosen, (reward - baseline) / p_eff, 0.0)
        weights = np.sqrt(p_eff) if self.adaptive_weights else np.ones(self.n_arms)
        self.acc.add(scores, weights, mask)
        self._update(arm, reward)
        self.steps += 1

        means, variances = self.acc.estimates()
        self.mu_hat[mask] = means[mask]
        self.var_hat[mask] = variances[mask]

        if not self.clip:
            idx = np.flatnonzero(self.active)
            dropped = eliminate(self.mu_hat[idx], self.var_hat[idx], self.horizon, idx)
            for a in dropped:
                self.active[a] = False
                self.eliminated_at[a] = self.steps
        self._refresh_propensities()

    def _refresh_propensities(self) -> None:
        idx = np.flatnonzero(self.active)
        if idx.size == 1:
            unmixed = np.ones(1)
        else:
            unmixed = probability_of_optimality(
                self.mu_hat[idx], self.var_hat[idx], self.spec.mc_samples, self.mc_rng
            )
        self.poptimality = np.zeros(self.n_arms)
        self.poptimality[idx] = unmixed
        self.props = np.zeros(self.n_arms)
        self.props[idx] = unmixed if self.clip else floor_mix(unmixed, self.gamma)


def make_policy(
    spec: PolicySpec,
    n_arms: int,
    horizon: int,
    mc_rng: np.random.Generator,
    noise_sigma: float | None = None,
) -> Policy:
    """Instantiate a policy; ``noise_sigma`` is the fallback for ``spec.noise_sigma``."""
    sigma = spec.noise_sigma if spec.noise_sigma is not None else noise_sigma
    if spec.kind == "ts_normal":
        if sigma is None or not sigma > 0:
            raise InvalidInputError("ts_normal needs a positive noise_sigma")
        return TSNormal(spec, n_arms, horizon, mc_rng, sigma)
    if spec.kind == "uniform":
        return UniformPolicy(spec, n_arms, horizon, mc_rng, sigma if sigma and sigma > 0 else 1.0)
    if spec.kind == "ucb_normal":
        return UCBNormal(spec, n_arms, horizon, mc_rng)
    return CausalTS(spec, n_arms, horizon, mc_rng)
