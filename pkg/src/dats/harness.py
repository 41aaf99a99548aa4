"""Episode runner, replication engine, stopping metric and parameter sweeps.

Horizon accounting: ``T`` counts every pull, including the K initialization
pulls, so an episode has ``T - K`` loop steps. Regret, traces and stopping
times all live on this unified 1-based pull axis.

Random streams: an episode seeded with ``seed`` draws rewards, decisions and
Monte Carlo propensities from three independent Philox streams keyed by
``(seed, role)``. Rewards therefore line up across policies for the same
seed, which keeps policy comparisons paired.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import History, InvalidInputError, StepRecord, regret_curve
from .environments import (
    GaussianEnvironment,
    make_explicit,
    make_semisynthetic,
    make_synthetic,
    sample_reward,
)
from .policies import DEFAULT_BETAS, PolicySpec, make_policy

REWARD_STREAM, DECISION_STREAM, MC_STREAM, DOMAIN_STREAM = 0, 1, 2, 3
PARALLELISM_ENV = "DATS_PARALLELISM"


def stream(seed: int, role: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), role])))


@dataclass(frozen=True)
class DomainSpec:
    """Reward domain: ``synthetic``, ``semi_synthetic`` or ``explicit``."""

    kind: str
    n_arms: int | None = None
    mean_variance: float | None = None
    mean_scale: str = "variance"
    sigma: float | None = None
    seed: int = 0
    snr: str | None = None
    means: tuple[float, ...] | None = None
    name: str | None = None

    def __post_init__(self) -> None:
        if self.kind == "synthetic":
            if self.n_arms is None or self.n_arms < 2:
                raise InvalidInputError("K: synthetic domains need K >= 2")
            if self.mean_variance is None or self.mean_variance < 0:
                raise InvalidInputError("mean_variance: required and non-negative for synthetic domains")
            if self.sigma is None:
                object.__setattr__(self, "sigma", 1.0)
        elif self.kind == "semi_synthetic":
            if self.snr is None:
                raise InvalidInputError("snr: required for semi_synthetic domains")
        elif self.kind == "explicit":
            if not self.means:
                raise InvalidInputError("means: required for explicit domains")
            if self.sigma is None:
                raise InvalidInputError("sigma: required for explicit domains")
            object.__setattr__(self, "means", tuple(float(m) for m in self.means))
        else:
            raise InvalidInputError(f"kind: unknown domain kind {self.kind!r}")
        if self.sigma is not None and not self.sigma > 0:
            raise InvalidInputError("sigma: must be positive")

    def build(self) -> GaussianEnvironment:
        if self.kind == "synthetic":
            rng = stream(self.seed, DOMAIN_STREAM)
            return make_synthetic(
                self.n_arms, self.mean_variance, rng, sigma=self.sigma, mean_scale=self.mean_scale
            )
        if self.kind == "semi_synthetic":
            env = make_semisynthetic(self.snr)
            return env if self.sigma is None else GaussianEnvironment(env.mu, self.sigma)
        return make_explicit(self.means, self.sigma)

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.kind == "synthetic":
            return f"synthetic_K{self.n_arms}_mv{self.mean_variance:g}_seed{self.seed}"
        if self.kind == "semi_synthetic":
            return f"semi_synthetic_{self.snr}"
        return f"explicit_K{len(self.means)}"


@dataclass
class EpisodeResult:
    """Per-pull outcome of one episode (arrays have length T).

    ``max_poptimality`` is NaN for initialization pulls and for policies
    without a probability of optimality (UCB). ``eliminated_at`` gives the
    pull index at which each arm was eliminated, or -1.
    """

    arms: np.ndarray
    rewards: np.ndarray
    regret_curve: np.ndarray
    max_poptimality: np.ndarray
    poptimality_arm: np.ndarray
    n_active: np.ndarray
    stopping_time: int | None
    best_arm_at_stop: int | None
    eliminated_at: np.ndarray
    sample_means: np.ndarray
    estimates: np.ndarray
    history: History | None = None

    @property
    def final_regret(self) -> float:
        return float(self.regret_curve[-1])

    @property
    def average_regret(self) -> float:
        return self.final_regret / self.regret_curve.size


def stopping_time(propensity_trace: Sequence[float], delta: float) -> int | None:
    """First 1-based index whose max probability of optimality reaches ``1 - delta``."""
    if not 0.0 < delta < 1.0:
        raise InvalidInputError(f"delta must be in (0, 1), got {delta}")
    trace = np.asarray(propensity_trace, dtype=float)
    hits = np.flatnonzero(trace >= 1.0 - delta)
    return int(hits[0]) + 1 if hits.size else None


def run_episode(
    policy_spec: PolicySpec,
    env: GaussianEnvironment,
    T: int,
    seed: int,
    *,
    delta: float = 0.05,
    record_history: bool = False,
) -> EpisodeResult:
    """Run K initialization pulls then ``T - K`` policy steps."""
    K = env.n_arms
    if T < K:
        raise InvalidInputError(f"T={T} is smaller than the number of arms K={K}")
    if T < 2:
        raise InvalidInputError("T must be >= 2")
    reward_rng = stream(seed, REWARD_STREAM)
    decision_rng = stream(seed, DECISION_STREAM)
    policy = make_policy(policy_spec, K, T, stream(seed, MC_STREAM), noise_sigma=env.sigma or None)
    history = History(K) if record_history else None

    arms = np.empty(T, dtype=np.int64)
    rewards = np.empty(T)
    maxp = np.full(T, np.nan)
    maxp_arm = np.full(T, -1, dtype=np.int64)
    n_active = np.empty(T, dtype=np.int64)
    eliminated_at = np.full(K, -1, dtype=np.int64)

    for a in range(K):
        r = sample_reward(env, a, reward_rng)
        policy.observe_initial(a, r)
        arms[a], rewards[a], n_active[a] = a, r, K
        if history is not None:
            history.record_initial(a, r)

    for i in range(K, T):
        t = i + 1
        decision = policy.decide(t, decision_rng)
        probs = policy.stopping_probabilities()
        if probs is not None:
            top = int(np.argmax(probs))
            maxp[i], maxp_arm[i] = probs[top], top
        n_active[i] = len(decision.active)
        baseline = policy.mean.copy() if history is not None else None
        r = sample_reward(env, decision.arm, reward_rng)
        policy.observe(decision, r)
        arms[i], rewards[i] = decision.arm, r
        if history is not None:
            history.record(
                StepRecord(i - K + 1, decision.arm, r, decision.propensities, baseline),
                policy.active_arms(),
            )

    for a in range(K):
        # policies count eliminations in loop steps
        if policy.eliminated_at[a] >= 0:
            eliminated_at[a] = policy.eliminated_at[a] + K
    stop = stopping_time(maxp, delta)
    beliefs = policy.beliefs()[0]
    return EpisodeResult(
        arms=arms,
        rewards=rewards,
        regret_curve=regret_curve(env.mu, arms),
        max_poptimality=maxp,
        poptimality_arm=maxp_arm,
        n_active=n_active,
        stopping_time=stop,
        best_arm_at_stop=None if stop is None else int(maxp_arm[stop - 1]),
        eliminated_at=eliminated_at,
        sample_means=policy.mean.copy(),
        estimates=np.asarray(beliefs, dtype=float).copy(),
        history=history,
    )


@dataclass(frozen=True)
class ReplicationSummary:
    policy: str
    domain: str
    n_arms: int
    sigma: float
    gamma: float | None
    beta: float | None
    T: int
    n_sims: int
    mean_final_regret: float
    se_final_regret: float
    mean_avg_regret: float
    se_avg_regret: float
    mean_stop_time: float
    se_stop_time: float
    frac_stopped: float
    frac_stop_correct: float
    n_not_stopped: int
    se_defined: bool
    base_seed: int
    final_regrets: tuple[float, ...] = field(repr=False, default=())

    @property
    def ci95_final_regret(self) -> tuple[float, float]:
        half = 1.96 * self.se_final_regret
        return self.mean_final_regret - half, self.mean_final_regret + half


def _mean_se(values: Sequence[float]) -> tuple[float, float]:
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        return math.nan, math.nan
    if x.size == 1:
        return float(x[0]), 0.0
    # fsum is exactly rounded, so the result does not depend on replication order
    mean = math.fsum(x) / x.size
    var = math.fsum((x - mean) ** 2) / (x.size - 1)
    return mean, math.sqrt(var / x.size)


def summarize(
    results: Sequence[EpisodeResult],
    policy_spec: PolicySpec,
    domain_label: str,
    env: GaussianEnvironment,
    T: int,
    base_seed: int,
) -> ReplicationSummary:
    final = [r.final_regret for r in results]
    avg = [r.average_regret for r in results]
    stops = [r.stopping_time for r in results if r.stopping_time is not None]
    correct = sum(1 for r in results if r.stopping_time is not None and r.best_arm_at_stop == env.best_arm)
    n = len(results)
    mf, sf = _mean_se(final)
    ma, sa = _mean_se(avg)
    ms, ss = _mean_se(stops)
    return ReplicationSummary(
        policy=policy_spec.label,
        domain=domain_label,
        n_arms=env.n_arms,
        sigma=env.sigma,
        gamma=policy_spec.gamma,
        beta=policy_spec.beta,
        T=T,
        n_sims=n,
        mean_final_regret=mf,
        se_final_regret=sf,
        mean_avg_regret=ma,
        se_avg_regret=sa,
        mean_stop_time=ms,
        se_stop_time=ss,
        frac_stopped=len(stops) / n,
        frac_stop_correct=correct / n,
        n_not_stopped=n - len(stops),
        se_defined=n > 1,
        base_seed=base_seed,
        final_regrets=tuple(final),
    )


def _episode_job(args) -> EpisodeResult:
    spec, env, T, seed, delta, record = args
    return run_episode(spec, env, T, seed, delta=delta, record_history=record)


def default_parallelism() -> int:
    try:
        return max(1, int(os.environ.get(PARALLELISM_ENV, "1")))
    except ValueError:
        return 1


def run_replications(
    policy_spec: PolicySpec,
    env: GaussianEnvironment,
    T: int,
    n_sims: int,
    base_seed: int,
    parallelism: int | None = None,
    *,
    delta: float = 0.05,
    record_history: bool = False,
) -> list[EpisodeResult]:
    """Episodes with seeds ``base_seed + i``, returned in replication order."""
    if n_sims < 1:
        raise InvalidInputError("n_sims must be >= 1")
    parallelism = default_parallelism() if parallelism is None else parallelism
    jobs = [(policy_spec, env, T, base_seed + i, delta, record_history) for i in range(n_sims)]
    if parallelism <= 1 or n_sims == 1:
        return [_episode_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(_episode_job, jobs))


def replicate(
    policy_spec: PolicySpec,
    domain_spec: DomainSpec | GaussianEnvironment,
    T: int,
    n_sims: int,
    base_seed: int,
    parallelism: int | None = None,
    *,
    delta: float = 0.05,
    return_episodes: bool = False,
):
    if isinstance(domain_spec, GaussianEnvironment):
        env, label = domain_spec, f"explicit_K{domain_spec.n_arms}"
    else:
        env, label = domain_spec.build(), domain_spec.label
    episodes = run_replications(policy_spec, env, T, n_sims, base_seed, parallelism, delta=delta)
    summary = summarize(episodes, policy_spec, label, env, T, base_seed)
    return (summary, episodes) if return_episodes else summary


def tune_ucb_beta(
    domain_spec: DomainSpec,
    betas: Sequence[float] = DEFAULT_BETAS,
    T: int = 10_000,
    n_sims: int = 64,
    base_seed: int = 0,
    parallelism: int | None = None,
    *,
    template: PolicySpec | None = None,
    delta: float = 0.05,
) -> tuple[float, list[ReplicationSummary]]:
    """Pick the beta with the lowest mean final regret (ties go to the smaller beta)."""
    if not betas:
        raise InvalidInputError("betas must be non-empty")
    template = template or PolicySpec("ucb_normal", beta=1.0)
    summaries = [
        replicate(template.with_(beta=float(b)), domain_spec, T, n_sims, base_seed, parallelism, delta=delta)
        for b in betas
    ]
    best = min(summaries, key=lambda s: (s.mean_final_regret, s.beta))
    return best.beta, summaries


def sweep_gamma(
    kinds: Sequence[str],
    gammas: dict[str, Sequence[float]],
    domain_spec: DomainSpec,
    T: int,
    n_sims: int,
    base_seed: int,
    parallelism: int | None = None,
    *,
    mc_samples: int | None = None,
    delta: float = 0.05,
) -> list[ReplicationSummary]:
    """One summary per (kind, gamma), all cells sharing the same seeds."""
    rows = []
    for kind in kinds:
        for g in gammas.get(kind, ()):
            spec = PolicySpec(kind, gamma=float(g))
            if mc_samples is not None:
                spec = spec.with_(mc_samples=mc_samples)
            rows.append(replicate(spec, domain_spec, T, n_sims, base_seed, parallelism, delta=delta))
    return rows
