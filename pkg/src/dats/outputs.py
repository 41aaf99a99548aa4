"""Output files: summary table, per-episode traces, figure aggregates, manifest.

All files are written atomically (temporary file, then rename). Floats use 17
significant digits so every double round-trips exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .harness import EpisodeResult, ReplicationSummary

SUMMARY_COLUMNS = (
    "policy", "domain", "K", "sigma", "gamma", "beta", "T", "n_sims",
    "mean_final_regret", "se_final_regret", "mean_avg_regret", "se_avg_regret",
    "mean_stop_time", "se_stop_time", "frac_stopped", "frac_stop_correct",
)
TRACE_COLUMNS = ("sim", "t", "arm", "reward", "cum_regret", "max_poptimality", "n_active")


def fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(value)


def summary_row(s: ReplicationSummary) -> list[str]:
    values = (
        s.policy, s.domain, s.n_arms, s.sigma, s.gamma, s.beta, s.T, s.n_sims,
        s.mean_final_regret, s.se_final_regret, s.mean_avg_regret, s.se_avg_regret,
        s.mean_stop_time, s.se_stop_time, s.frac_stopped, s.frac_stop_correct,
    )
    return [fmt(v) for v in values]


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def summary_csv(summaries: Sequence[ReplicationSummary]) -> str:
    return csv_text(SUMMARY_COLUMNS, (summary_row(s) for s in summaries))


def trace_csv(sim: int, episode: EpisodeResult) -> str:
    rows = (
        (sim, i + 1, int(episode.arms[i]), float(episode.rewards[i]), float(episode.regret_curve[i]),
         float(episode.max_poptimality[i]), int(episode.n_active[i]))
        for i in range(episode.arms.size)
    )
    return csv_text(TRACE_COLUMNS, rows)


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


@dataclass
class OutputBundle:
    summaries: list[ReplicationSummary]
    manifest: dict[str, Any]
    # (policy label, domain label) -> episodes, only filled when tracing
    traces: dict[tuple[str, str], list[EpisodeResult]] = field(default_factory=dict)
    # extra CSV files (name -> text), e.g. figure aggregates
    extra: dict[str, str] = field(default_factory=dict)


def _safe(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_.=" else "_" for c in name)


def write_outputs(bundle: OutputBundle, out_dir: str | os.PathLike) -> list[Path]:
    """Write ``summary.csv``, ``manifest.json``, traces and extras; return the paths."""
    out = Path(out_dir)
    written = []
    path = out / "summary.csv"
    atomic_write(path, summary_csv(bundle.summaries))
    written.append(path)
    domains = {d for _, d in bundle.traces}
    for (policy, domain), episodes in bundle.traces.items():
        base = out if len(domains) <= 1 else out / _safe(domain)
        for sim, ep in enumerate(episodes):
            path = base / f"trace_{_safe(policy)}_{sim}.csv"
            atomic_write(path, trace_csv(sim, ep))
            written.append(path)
    for name, text in bundle.extra.items():
        path = out / name
        atomic_write(path, text)
        written.append(path)
    path = out / "manifest.json"
    atomic_write(path, json.dumps(bundle.manifest, indent=2, sort_keys=True, default=_json_default) + "\n")
    written.append(path)
    return written


def _json_default(obj: Any):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def fig1_csv(rows: Sequence[tuple[ReplicationSummary, float | None]]) -> str:
    """Average regret vs sqrt(K) and stopping time vs K, one row per (policy, domain).

    ``rows`` pairs each summary with its domain's mean variance (the SNR level).
    """
    header = ("policy", "domain", "mean_variance", "K", "sqrt_K", "mean_avg_regret", "se_avg_regret",
              "mean_stop_time", "se_stop_time", "frac_stopped")
    return csv_text(header, (
        (s.policy, s.domain, mv, s.n_arms, math.sqrt(s.n_arms), s.mean_avg_regret, s.se_avg_regret,
         s.mean_stop_time, s.se_stop_time, s.frac_stopped)
        for s, mv in rows
    ))


def regret_curve_rows(policy: str, domain: str, episodes: Sequence[EpisodeResult], n_points: int = 100):
    """Mean cumulative regret with a 95% CI at evenly spaced pull indices."""
    curves = np.stack([e.regret_curve for e in episodes])
    T = curves.shape[1]
    idx = np.unique(np.linspace(1, T, min(n_points, T)).round().astype(int))
    for t in idx:
        col = curves[:, t - 1]
        mean = float(col.mean())
        half = 1.96 * float(col.std(ddof=1) / math.sqrt(col.size)) if col.size > 1 else 0.0
        yield policy, domain, int(t), mean, mean - half, mean + half


def fig2_regret_csv(rows: Iterable[tuple]) -> str:
    return csv_text(("policy", "domain", "t", "mean_cum_regret", "ci95_low", "ci95_high"), rows)


def fig2_stopping_csv(summaries: Sequence[ReplicationSummary]) -> str:
    header = ("policy", "domain", "sigma", "mean_stop_time", "ci95_half_width", "frac_stopped",
              "frac_stop_correct")
    return csv_text(header, (
        (s.policy, s.domain, s.sigma, s.mean_stop_time, 1.96 * s.se_stop_time, s.frac_stopped,
         s.frac_stop_correct)
        for s in summaries
    ))
