"""Benchmark harness: scenario definitions, metric CSV emission, summaries.

Scenario CSVs follow a fixed header so downstream tooling (plots, compare)
can consume them without coordination:

    scenario,policy,seed,episode,resolved,total_requests,qubits_used,channels_used,mean_fidelity,steps

"Throughput" is reported as resolved deliveries per episode; summaries also
carry resolved/total ratios. Channel usage is a per-episode mean, which is
the one averaging window this harness defines.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .entanglement import PhysParams
from .env import (
    EnvConfig,
    EpisodeRecord,
    POLICY_AGENT,
    RewardParams,
    evaluate_parallel,
    train,
    write_training_log,
)
from .qlearn import Mlp, TrainConfig, load_checkpoint, save_checkpoint
from .topology import ConfigError, TopologyConfig

CSV_HEADER = ("scenario,policy,seed,episode,resolved,total_requests,"
              "qubits_used,channels_used,mean_fidelity,steps")

_SUMMARY_METRICS = ("resolved", "resolved_ratio", "qubits_used", "channels_used",
                    "mean_fidelity", "steps")
_COMPARE_METRICS = ("resolved", "qubits_used", "channels_used")

# fixed sub-seed labels so training, evaluation and topology streams never collide
_TRAIN_KEY = 1
_EVAL_KEY = 2


@dataclass(frozen=True)
class Scenario:
    name: str
    rows: int
    cols: int
    qubit_range: tuple[int, int]
    channel_range: tuple[int, int]
    fidelity_range: tuple[float, float]
    p_e: float
    q_v: float
    f_min: float
    demand_count: int
    policies: tuple[str, ...] = ("qudqn", "shortest", "random")
    episodes: int = 500
    seed: int = 1
    train_episodes: int = 2000
    k_paths: int = 3

    def __post_init__(self):
        if self.episodes < 1:
            raise ConfigError(f"episodes must be >= 1, got {self.episodes}")
        for policy in self.policies:
            if policy not in ("qudqn", "shortest", "random"):
                raise ConfigError(f"unknown policy {policy!r} in scenario {self.name}")

    def env_config(self, seed: int | None = None) -> EnvConfig:
        return EnvConfig(
            grid=TopologyConfig(
                rows=self.rows, cols=self.cols,
                qubit_capacity_range=self.qubit_range,
                channel_capacity_range=self.channel_range,
                fidelity_range=self.fidelity_range,
            ),
            topology_seed=self.seed if seed is None else seed,
            demand_count=self.demand_count,
            k_paths=self.k_paths,
            phys=PhysParams(p_e=self.p_e, q_v=self.q_v, f_min=self.f_min),
            reward=RewardParams(),
        )


@dataclass(frozen=True)
class MetricsRow:
    scenario: str
    policy: str
    seed: int
    episode: int
    resolved: int
    total_requests: int
    qubits_used: int
    channels_used: int
    mean_fidelity: float
    steps: int

    def as_csv(self) -> str:
        return (f"{self.scenario},{self.policy},{self.seed},{self.episode},"
                f"{self.resolved},{self.total_requests},{self.qubits_used},"
                f"{self.channels_used},{self.mean_fidelity!r},{self.steps}")


def scenario_suite() -> list[Scenario]:
    """The three benchmark families this harness ships with."""
    phys = dict(channel_range=(26, 35), fidelity_range=(0.70, 0.95),
                p_e=0.9, q_v=0.9, f_min=0.85)
    scenarios = []
    # (a) grid scaling: 5x5..10x10 paired with 5..10 requests, 4 qubits per node
    for i, size in enumerate(range(5, 11)):
        scenarios.append(Scenario(
            name=f"grid-{size}x{size}", rows=size, cols=size,
            qubit_range=(4, 4), demand_count=5 + i, seed=100 + i, **phys))
    # (b) demand scaling: 7x7 grid, 20 qubits per node, 10..30 requests
    for i, count in enumerate(range(10, 31, 5)):
        scenarios.append(Scenario(
            name=f"demand-{count}", rows=7, cols=7,
            qubit_range=(20, 20), demand_count=count, seed=200 + i, **phys))
    # (c) small walkthrough network: 20 nodes, 4-6 qubits, 6 requests
    scenarios.append(Scenario(
        name="illustration-4x5", rows=4, cols=5,
        qubit_range=(4, 6), demand_count=6, seed=300, **phys))
    return scenarios


def rows_from_records(scenario: str, policy: str, seed: int,
                      records: list[EpisodeRecord]) -> list[MetricsRow]:
    return [
        MetricsRow(scenario=scenario, policy=policy, seed=seed, episode=i,
                   resolved=r.resolved, total_requests=r.total_requests,
                   qubits_used=r.qubits_used, channels_used=r.channels_used,
                   mean_fidelity=r.mean_fidelity, steps=r.steps)
        for i, r in enumerate(records)
    ]


def write_metrics_csv(rows: list[MetricsRow], path: str | Path) -> None:
    lines = [CSV_HEADER] + [row.as_csv() for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def read_metrics_csv(path: str | Path) -> list[MetricsRow]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path} does not carry the metrics CSV header")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        rows.append(MetricsRow(
            scenario=parts[0], policy=parts[1], seed=int(parts[2]), episode=int(parts[3]),
            resolved=int(parts[4]), total_requests=int(parts[5]), qubits_used=int(parts[6]),
            channels_used=int(parts[7]), mean_fidelity=float(parts[8]), steps=int(parts[9])))
    return rows


def summarize_rows(rows: list[MetricsRow]) -> dict:
    """Per-policy means and standard deviations (population, ddof=0)."""
    policies = sorted({row.policy for row in rows})
    out = {}
    for policy in policies:
        sub = [row for row in rows if row.policy == policy]
        columns = {
            "resolved": np.asarray([r.resolved for r in sub], dtype=np.float64),
            "resolved_ratio": np.asarray(
                [r.resolved / r.total_requests for r in sub], dtype=np.float64),
            "qubits_used": np.asarray([r.qubits_used for r in sub], dtype=np.float64),
            "channels_used": np.asarray([r.channels_used for r in sub], dtype=np.float64),
            "mean_fidelity": np.asarray([r.mean_fidelity for r in sub], dtype=np.float64),
            "steps": np.asarray([r.steps for r in sub], dtype=np.float64),
        }
        stats = {"episodes": len(sub)}
        for metric in _SUMMARY_METRICS:
            stats[f"{metric}_mean"] = float(np.mean(columns[metric]))
            stats[f"{metric}_std"] = float(np.std(columns[metric]))
        out[policy] = stats
    return out


def run_scenario(scenario: Scenario, out_dir: str | Path, *,
                 episodes: int | None = None, train_episodes: int | None = None,
                 seed: int | None = None, checkpoint: str | Path | None = None,
                 train_cfg: TrainConfig | None = None, workers: int = 1) -> dict:
    """Train where required, evaluate every listed policy, emit CSV + summary JSON.

    workers > 1 spreads evaluation replications over processes; training and
    CSV writing stay in this process, and outputs are identical either way.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    episodes = scenario.episodes if episodes is None else episodes
    train_episodes = scenario.train_episodes if train_episodes is None else train_episodes
    seed = scenario.seed if seed is None else seed
    env_cfg = scenario.env_config(seed)
    mlp: Mlp | None = None
    if POLICY_AGENT in scenario.policies:
        if checkpoint is not None:
            mlp, _ = load_checkpoint(checkpoint)
        else:
            if train_cfg is None:
                train_cfg = TrainConfig(
                    episodes=train_episodes,
                    epsilon_decay_steps=max(1, train_episodes * scenario.demand_count * 2))
            mlp, log = train(env_cfg, train_cfg, _subseed(seed, _TRAIN_KEY))
            save_checkpoint(mlp, out_dir / f"{scenario.name}.checkpoint.json",
                            global_step=len(log))
            write_training_log(log, out_dir / f"{scenario.name}.train_log.csv")
    rows: list[MetricsRow] = []
    for policy in scenario.policies:
        records = evaluate_parallel(policy, env_cfg, episodes, _subseed(seed, _EVAL_KEY),
                                    mlp=mlp if policy == POLICY_AGENT else None,
                                    workers=workers)
        rows.extend(rows_from_records(scenario.name, policy, seed, records))
    csv_path = out_dir / f"{scenario.name}.csv"
    write_metrics_csv(rows, csv_path)
    summary = {
        "scenario": scenario.name,
        "seed": seed,
        "episodes": episodes,
        "config": asdict(scenario),
        "policies": summarize_rows(rows),
    }
    (out_dir / f"{scenario.name}.summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def compare(summaries: list[dict]) -> dict:
    """Merge summaries of one scenario and compute pairwise percentage gaps.

    Differences use (a - b) / b * 100, read as "a improves on b by x%".
    """
    if not summaries:
        raise ValueError("no summaries to compare")
    names = {s["scenario"] for s in summaries}
    if len(names) != 1:
        raise ValueError(f"summaries must share one scenario, got {sorted(names)}")
    policies: dict[str, dict] = {}
    for summary in summaries:
        policies.update(summary["policies"])
    ordered = sorted(policies)
    differences = {}
    for a in ordered:
        for b in ordered:
            if a == b:
                continue
            entry = {}
            for metric in _COMPARE_METRICS:
                base = policies[b][f"{metric}_mean"]
                value = policies[a][f"{metric}_mean"]
                entry[f"{metric}_pct"] = (value - base) / base * 100.0 if base != 0 else None
            differences[f"{a}_vs_{b}"] = entry
    return {"scenario": names.pop(), "policies": policies, "differences": differences}


def _subseed(seed: int, key: int) -> int:
    return int(np.random.SeedSequence([seed, key]).generate_state(1)[0])
