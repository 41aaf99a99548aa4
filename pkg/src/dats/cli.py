"""Command-line entry point.

    dats run|sweep-gamma|tune-beta|figures --config <path|preset> --out <dir>
         [--seed N] [--parallelism N] [--trace] [--T N] [--n-sims N] [--mc-samples N]

``--parallelism`` defaults to the ``DATS_PARALLELISM`` environment variable
(or 1). ``--T``, ``--n-sims`` and ``--mc-samples`` override the config for
quick smoke runs.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import platform
import sys
import time
from typing import Iterator

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig, TunedUCB, config_to_dict, load_config
from .core import InvalidInputError
from .harness import (
    DECISION_STREAM,
    DOMAIN_STREAM,
    MC_STREAM,
    REWARD_STREAM,
    DomainSpec,
    EpisodeResult,
    ReplicationSummary,
    default_parallelism,
    replicate,
    sweep_gamma,
    tune_ucb_beta,
)
from .outputs import (
    OutputBundle,
    fig1_csv,
    fig2_regret_csv,
    fig2_stopping_csv,
    regret_curve_rows,
    write_outputs,
)
from .policies import PolicySpec

log = logging.getLogger("dats")

DEFAULT_GAMMA_GRID = {
    "ts_ipw": (0.01, 0.05, 0.1),
    "ts_dr": (0.01, 0.05, 0.1),
    "dats": (0.01, 0.05, 0.1),
    "dats_clipping": (0.001, 0.01, 0.02),
}
COMMANDS = ("run", "sweep-gamma", "tune-beta", "figures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dats", description="Bandit experiments with doubly-adaptive TS.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{" + ",".join(COMMANDS) + "}")
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML config path or bundled preset name")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="base seed (64-bit unsigned)")
        p.add_argument("--parallelism", type=int, default=None)
        p.add_argument("--trace", action="store_true", help="write per-episode trace CSVs")
        p.add_argument("--T", dest="horizon", type=int, default=None)
        p.add_argument("--n-sims", type=int, default=None)
        p.add_argument("--mc-samples", type=int, default=None)
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    changes = {}
    if args.seed is not None:
        changes["base_seed"] = args.seed
    if args.horizon is not None:
        changes["T"] = args.horizon
    if args.n_sims is not None:
        changes["n_sims"] = args.n_sims
    if args.trace:
        changes["trace"] = True
    if args.mc_samples is not None:
        changes["mc_samples"] = args.mc_samples
        changes["policies"] = tuple(
            p.with_(mc_samples=args.mc_samples)
            if isinstance(p, PolicySpec) and p.kind != "ucb_normal" and p.mc_samples > 0
            else p
            for p in config.policies
        )
    return dataclasses.replace(config, **changes) if changes else config


def _cell(policy, domain: DomainSpec, config: ExperimentConfig, parallelism: int, keep: bool):
    """Replicate one (policy, domain) cell; tuned UCB reports its best beta."""
    if isinstance(policy, TunedUCB):
        best, _ = tune_ucb_beta(
            domain, config.betas, config.T, config.n_sims, config.base_seed, parallelism,
            template=policy.spec(1.0), delta=config.delta,
        )
        policy = policy.spec(best)
    out = replicate(
        policy, domain, config.T, config.n_sims, config.base_seed, parallelism,
        delta=config.delta, return_episodes=keep,
    )
    return out if keep else (out, None)


def iter_cells(config: ExperimentConfig, parallelism: int, keep: bool) -> Iterator[
    tuple[DomainSpec, ReplicationSummary, list[EpisodeResult] | None]
]:
    for domain in config.domains:
        for policy in config.policies:
            log.info("running %s on %s", policy.kind, domain.label)
            summary, episodes = _cell(policy, domain, config, parallelism, keep)
            yield domain, summary, episodes


def manifest(config: ExperimentConfig, command: str, summaries, started: float, parallelism: int) -> dict:
    return {
        "command": command,
        "config": config_to_dict(config),
        "code_version": __version__,
        "numpy_version": np.__version__,
        "python_version": platform.python_version(),
        "parallelism": parallelism,
        "seed_ledger": {
            "base_seed": config.base_seed,
            "episode_seeds": [config.base_seed, config.base_seed + config.n_sims - 1],
            "stream": "Generator(Philox(SeedSequence([seed, role])))",
            "roles": {"reward": REWARD_STREAM, "decision": DECISION_STREAM, "monte_carlo": MC_STREAM,
                      "synthetic_domain_means": DOMAIN_STREAM},
            "normal_sampler": "numpy ziggurat standard_normal (float32 for Monte Carlo propensities)",
            "domain_seeds": {d.label: d.seed for d in config.domains if d.kind == "synthetic"},
        },
        "stop_time_exclusions": [
            {"policy": s.policy, "domain": s.domain, "gamma": s.gamma, "beta": s.beta,
             "n_not_stopped": s.n_not_stopped}
            for s in summaries
        ],
        "started_unix": started,
        "wall_clock_seconds": time.time() - started,
    }


def cmd_run(config, parallelism):
    summaries, traces = [], {}
    for domain, summary, episodes in iter_cells(config, parallelism, keep=config.trace):
        summaries.append(summary)
        if episodes is not None:
            traces[(summary.policy, domain.label)] = episodes
    return OutputBundle(summaries, {}, traces)


def cmd_figures(config, parallelism):
    summaries, fig1_rows, curve_rows, traces = [], [], [], {}
    for domain, summary, episodes in iter_cells(config, parallelism, keep=True):
        summaries.append(summary)
        fig1_rows.append((summary, domain.mean_variance))
        curve_rows.extend(regret_curve_rows(summary.policy, domain.label, episodes))
        if config.trace:
            traces[(summary.policy, domain.label)] = episodes
    extra = {
        "fig1_scaling.csv": fig1_csv(fig1_rows),
        "fig2_regret_curves.csv": fig2_regret_csv(curve_rows),
        "fig2_stopping.csv": fig2_stopping_csv(summaries),
    }
    return OutputBundle(summaries, {}, traces, extra)


def cmd_sweep_gamma(config, parallelism):
    grid = config.gamma_sweep or DEFAULT_GAMMA_GRID
    summaries = []
    for domain in config.domains:
        summaries.extend(sweep_gamma(
            list(grid), grid, domain, config.T, config.n_sims, config.base_seed, parallelism,
            mc_samples=config.mc_samples, delta=config.delta,
        ))
    return OutputBundle(summaries, {})


def cmd_tune_beta(config, parallelism):
    template = next((p for p in config.policies if isinstance(p, TunedUCB)), TunedUCB()).spec(1.0)
    summaries = []
    for domain in config.domains:
        best, rows = tune_ucb_beta(
            domain, config.betas, config.T, config.n_sims, config.base_seed, parallelism,
            template=template, delta=config.delta,
        )
        summaries.extend(rows)
        chosen = next(s for s in rows if s.beta == best)
        summaries.append(dataclasses.replace(chosen, policy="ucb_normal_best"))
    return OutputBundle(summaries, {})


HANDLERS = {
    "run": cmd_run,
    "figures": cmd_figures,
    "sweep-gamma": cmd_sweep_gamma,
    "tune-beta": cmd_tune_beta,
}


def run_command(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        config = apply_overrides(load_config(args.config), args)
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed", "must be a 64-bit unsigned integer")
        parallelism = args.parallelism if args.parallelism is not None else default_parallelism()
        if parallelism < 1:
            raise ConfigError("--parallelism", "must be >= 1")
        started = time.time()
        bundle = HANDLERS[args.command](config, parallelism)
        bundle.manifest = manifest(config, args.command, bundle.summaries, started, parallelism)
        write_outputs(bundle, args.out)
    except (ConfigError, InvalidInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
