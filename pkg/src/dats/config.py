"""Experiment configuration: YAML documents to validated dataclasses and back.

See ``docs/config.md`` for the schema. Every validation error is a
:class:`ConfigError` whose message starts with the offending field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from .core import InvalidInputError
from .harness import DomainSpec
from .policies import DEFAULT_BETAS, POLICY_KINDS, PolicySpec
from .propensity import DEFAULT_MC_SAMPLES


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class TunedUCB:
    """UCB-Normal whose beta is picked per domain from ``ExperimentConfig.betas``."""

    ucb_variance: str = "standard"
    ucb_exploration: str = "min2"

    kind = "ucb_normal"

    def spec(self, beta: float) -> PolicySpec:
        return PolicySpec(
            "ucb_normal", beta=beta, ucb_variance=self.ucb_variance, ucb_exploration=self.ucb_exploration
        )


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    domains: tuple[DomainSpec, ...]
    policies: tuple[PolicySpec | TunedUCB, ...]
    T: int = 10_000
    n_sims: int = 64
    base_seed: int = 0
    mc_samples: int = DEFAULT_MC_SAMPLES
    delta: float = 0.05
    trace: bool = False
    betas: tuple[float, ...] = DEFAULT_BETAS
    gamma_sweep: dict[str, tuple[float, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.domains:
            raise ConfigError("domains", "at least one domain is required")
        if self.T < 2:
            raise ConfigError("T", "must be >= 2")
        for d in self.domains:
            k = len(d.means) if d.kind == "explicit" else (d.n_arms or 6)
            if self.T < k:
                raise ConfigError("T", f"must be >= the number of arms ({k}) of domain {d.label}")
        if self.n_sims < 1:
            raise ConfigError("n_sims", "must be >= 1")
        if not 0 <= self.base_seed < 2**64:
            raise ConfigError("base_seed", "must be a 64-bit unsigned integer")
        if self.mc_samples < 1:
            raise ConfigError("mc_samples", "must be >= 1")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError("delta", "must be in (0, 1)")
        if not self.betas or any(b < 0 for b in self.betas):
            raise ConfigError("betas", "must be a non-empty list of non-negative numbers")


_DOMAIN_KEYS = {"kind", "K", "mean_variance", "mean_scale", "sigma", "seed", "snr", "means", "name"}
_POLICY_KEYS = {
    "kind", "gamma", "beta", "prior_mean", "prior_variance", "noise_sigma",
    "mc_samples", "ucb_variance", "ucb_exploration",
}
_TOP_KEYS = {
    "name", "domain", "domains", "policies", "T", "n_sims", "base_seed",
    "mc_samples", "delta", "trace", "tune_beta", "sweep_gamma",
}


def _number(value: Any, field_name: str, cast=float):
    if isinstance(value, bool):
        raise ConfigError(field_name, f"expected a number, got {value!r}")
    if cast is int:
        # parse ints exactly: seeds go up to 2**64 and floats stop at 2**53
        if isinstance(value, int):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
        try:
            return int(str(value).strip())
        except ValueError:
            pass
        try:
            as_float = float(value)
        except (TypeError, ValueError):
            raise ConfigError(field_name, f"expected a number, got {value!r}") from None
        if as_float.is_integer():
            return int(as_float)
        raise ConfigError(field_name, f"expected an integer, got {value!r}")
    try:
        out = cast(value)
    except (TypeError, ValueError):
        raise ConfigError(field_name, f"expected a number, got {value!r}") from None
    if cast is float and not math.isfinite(out):
        raise ConfigError(field_name, f"must be finite, got {value!r}")
    return out


def _check_keys(raw: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ConfigError(f"{where}.{unknown[0]}", "unknown field")


def _parse_domain(raw: Any, where: str) -> DomainSpec:
    if not isinstance(raw, dict):
        raise ConfigError(where, "expected a mapping")
    _check_keys(raw, _DOMAIN_KEYS, where)
    if "kind" not in raw:
        raise ConfigError(f"{where}.kind", "missing required field")
    kw: dict[str, Any] = {"kind": raw["kind"]}
    if "K" in raw:
        kw["n_arms"] = _number(raw["K"], f"{where}.K", int)
    for key in ("mean_variance", "sigma"):
        if raw.get(key) is not None:
            kw[key] = _number(raw[key], f"{where}.{key}")
    if "seed" in raw:
        kw["seed"] = _number(raw["seed"], f"{where}.seed", int)
    for key in ("mean_scale", "snr", "name"):
        if raw.get(key) is not None:
            kw[key] = str(raw[key])
    if raw.get("means") is not None:
        kw["means"] = tuple(_number(m, f"{where}.means") for m in raw["means"])
    if kw["kind"] == "synthetic":
        for key in ("K", "mean_variance"):
            if key not in raw:
                raise ConfigError(f"{where}.{key}", "missing required field")
    try:
        return DomainSpec(**kw)
    except InvalidInputError as exc:
        field_name, _, msg = str(exc).partition(": ")
        raise ConfigError(f"{where}.{field_name}", msg or str(exc)) from None


def _parse_policy(raw: Any, where: str, mc_samples: int) -> PolicySpec | TunedUCB:
    if not isinstance(raw, dict):
        raise ConfigError(where, "expected a mapping")
    _check_keys(raw, _POLICY_KEYS, where)
    kind = raw.get("kind")
    if kind is None:
        raise ConfigError(f"{where}.kind", "missing required field")
    if kind not in POLICY_KINDS:
        raise ConfigError(f"{where}.kind", f"unknown policy kind {kind!r}")
    if kind == "ucb_normal" and "beta" not in raw:
        raise ConfigError(f"{where}.beta", "missing required field for ucb_normal")
    if kind == "ucb_normal" and raw["beta"] == "tuned":
        extra = {k: str(raw[k]) for k in ("ucb_variance", "ucb_exploration") if k in raw}
        return TunedUCB(**extra)
    kw: dict[str, Any] = {"kind": kind}
    for key in ("gamma", "beta", "prior_mean", "prior_variance", "noise_sigma"):
        if raw.get(key) is not None:
            kw[key] = _number(raw[key], f"{where}.{key}")
    kw["mc_samples"] = _number(raw.get("mc_samples", mc_samples), f"{where}.mc_samples", int)
    for key in ("ucb_variance", "ucb_exploration"):
        if key in raw:
            kw[key] = str(raw[key])
    try:
        return PolicySpec(**kw)
    except InvalidInputError as exc:
        field_name, _, msg = str(exc).partition(": ")
        raise ConfigError(f"{where}.{field_name}", msg or str(exc)) from None


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<document>", "expected a mapping at the top level")
    _check_keys(raw, _TOP_KEYS, "config")
    if "domain" in raw and "domains" in raw:
        raise ConfigError("domains", "give either 'domain' or 'domains', not both")
    domains_raw = [raw["domain"]] if "domain" in raw else raw.get("domains")
    if not domains_raw:
        raise ConfigError("domains", "missing required field")
    if "policies" not in raw or not raw["policies"]:
        raise ConfigError("policies", "missing required field")
    mc = _number(raw.get("mc_samples", DEFAULT_MC_SAMPLES), "mc_samples", int)
    if mc < 1:
        raise ConfigError("mc_samples", "must be >= 1")
    domains = tuple(_parse_domain(d, f"domains[{i}]") for i, d in enumerate(domains_raw))
    policies = tuple(_parse_policy(p, f"policies[{i}]", mc) for i, p in enumerate(raw["policies"]))
    betas = DEFAULT_BETAS
    if raw.get("tune_beta") is not None:
        tb = raw["tune_beta"]
        if not isinstance(tb, dict) or "betas" not in tb:
            raise ConfigError("tune_beta.betas", "missing required field")
        betas = tuple(_number(b, "tune_beta.betas") for b in tb["betas"])
    sweep: dict[str, tuple[float, ...]] = {}
    for kind, values in (raw.get("sweep_gamma") or {}).items():
        if kind not in ("dats", "dats_clipping", "ts_ipw", "ts_dr"):
            raise ConfigError(f"sweep_gamma.{kind}", "gamma sweeps apply to dats, dats_clipping, ts_ipw, ts_dr")
        gammas = tuple(_number(g, f"sweep_gamma.{kind}") for g in (values or ()))
        if any(not 0.0 < g < 1.0 for g in gammas):
            raise ConfigError(f"sweep_gamma.{kind}", "every gamma must be in (0, 1)")
        sweep[kind] = gammas
    trace = raw.get("trace", False)
    if not isinstance(trace, bool):
        raise ConfigError("trace", "expected true or false")
    return ExperimentConfig(
        name=str(raw.get("name", "experiment")),
        domains=domains,
        policies=policies,
        T=_number(raw.get("T", 10_000), "T", int),
        n_sims=_number(raw.get("n_sims", 64), "n_sims", int),
        base_seed=_number(raw.get("base_seed", 0), "base_seed", int),
        mc_samples=mc,
        delta=_number(raw.get("delta", 0.05), "delta"),
        trace=trace,
        betas=betas,
        gamma_sweep=sweep,
    )


def parse_config(text: str) -> ExperimentConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<document>", f"not valid YAML: {exc}") from None
    return config_from_dict(raw)


def _domain_to_dict(d: DomainSpec) -> dict:
    out: dict[str, Any] = {"kind": d.kind}
    if d.kind == "synthetic":
        out.update(K=d.n_arms, mean_variance=d.mean_variance, mean_scale=d.mean_scale, seed=d.seed)
    if d.kind == "semi_synthetic":
        out["snr"] = d.snr
    if d.kind == "explicit":
        out["means"] = list(d.means)
    if d.sigma is not None:
        out["sigma"] = d.sigma
    if d.name:
        out["name"] = d.name
    return out


def _policy_to_dict(p: PolicySpec | TunedUCB) -> dict:
    if isinstance(p, TunedUCB):
        return {"kind": "ucb_normal", "beta": "tuned", "ucb_variance": p.ucb_variance,
                "ucb_exploration": p.ucb_exploration}
    out = {k: v for k, v in p.to_dict().items() if v is not None}
    if p.kind != "ucb_normal":
        out.pop("ucb_variance")
        out.pop("ucb_exploration")
    return out


def config_to_dict(config: ExperimentConfig) -> dict:
    out: dict[str, Any] = {
        "name": config.name,
        "T": config.T,
        "n_sims": config.n_sims,
        "base_seed": config.base_seed,
        "mc_samples": config.mc_samples,
        "delta": config.delta,
        "trace": config.trace,
        "domains": [_domain_to_dict(d) for d in config.domains],
        "policies": [_policy_to_dict(p) for p in config.policies],
        "tune_beta": {"betas": list(config.betas)},
    }
    if config.gamma_sweep:
        out["sweep_gamma"] = {k: list(v) for k, v in config.gamma_sweep.items()}
    return out


def serialize_config(config: ExperimentConfig) -> str:
    return yaml.safe_dump(config_to_dict(config), sort_keys=False)


def preset_names() -> list[str]:
    root = resources.files("dats") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def load_config(path_or_preset: str) -> ExperimentConfig:
    """Read a config file, or a bundled preset by name (e.g. ``synthetic20``)."""
    path = Path(path_or_preset)
    if path.is_file():
        return parse_config(path.read_text())
    preset = resources.files("dats") / "presets" / f"{path_or_preset}.yaml"
    if preset.is_file():
        return parse_config(preset.read_text())
    raise ConfigError("--config", f"no such file or preset: {path_or_preset!r} (presets: {preset_names()})")
