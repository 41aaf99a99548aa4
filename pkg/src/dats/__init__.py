"""Doubly-adaptive Thompson sampling and baseline bandit policies.

The package is split into small modules:

- :mod:`dats.core` -- arm statistics, step records, histories and regret.
- :mod:`dats.estimators` -- sample-mean, IPW, DR and adaptively weighted DR estimators.
- :mod:`dats.propensity` -- probability-of-optimality and floor mixing.
- :mod:`dats.policies` -- TS-Normal, UCB-Normal, DATS, DATS-clipping, TS-IPW, TS-DR, uniform.
- :mod:`dats.environments` -- Gaussian reward environments.
- :mod:`dats.harness` -- episode runner, replication and sweeps.
- :mod:`dats.config`, :mod:`dats.outputs`, :mod:`dats.cli` -- configuration, outputs and CLI.
"""

__version__ = "0.1.0"

from .core import (
    ArmState,
    CorruptHistoryError,
    Decision,
    History,
    InvalidInputError,
    StepRecord,
    cumulative_regret,
    update_arm_state,
)
from .environments import GaussianEnvironment, make_semisynthetic, make_synthetic, sample_reward
from .harness import EpisodeResult, ReplicationSummary, replicate, run_episode, stopping_time
from .policies import PolicySpec, make_policy

__all__ = [
    "ArmState",
    "CorruptHistoryError",
    "Decision",
    "EpisodeResult",
    "GaussianEnvironment",
    "History",
    "InvalidInputError",
    "PolicySpec",
    "ReplicationSummary",
    "StepRecord",
    "cumulative_regret",
    "make_policy",
    "make_semisynthetic",
    "make_synthetic",
    "replicate",
    "run_episode",
    "sample_reward",
    "stopping_time",
    "update_arm_state",
]
