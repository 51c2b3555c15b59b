"""Command-line interface: gen-topology, train, evaluate, compare, suite.

Every flag can also come from a JSON config file (--config); explicit flags
win over file values. Exit codes: 0 success, 2 configuration error, 3 I/O
error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import (
    compare,
    rows_from_records,
    run_scenario,
    scenario_suite,
    summarize_rows,
    write_metrics_csv,
)
from .entanglement import PhysParams
from .env import (
    EnvConfig,
    POLICIES,
    RewardParams,
    evaluate,
    train,
    write_training_log,
)
from .qlearn import TrainConfig, load_checkpoint, save_checkpoint
from .topology import ConfigError, TopologyConfig, grid_topology, save_topology

_DEFAULTS = {
    "grid": "5x5",
    "qubits": "4:4",
    "channels": "26:35",
    "fidelity": "0.70:0.95",
    "pe": 0.9,
    "qv": 0.9,
    "fmin": 0.85,
    "requests": 5,
    "k_paths": 3,
    "episodes": 500,
    "train_episodes": 2000,
    "seed": 1,
    "policy": "shortest",
    "out": None,
    "checkpoint": None,
    "log": None,
    "summary": None,
    "scenario_name": None,
    "filter": None,
    "workers": 1,
}


def parse_grid(text: str) -> tuple[int, int]:
    try:
        rows, cols = text.lower().split("x")
        return int(rows), int(cols)
    except ValueError:
        raise ConfigError(f"--grid expects RxC (e.g. 5x5), got {text!r}") from None


def parse_int_range(text: str, flag: str) -> tuple[int, int]:
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise ConfigError(f"--{flag} expects LO:HI (e.g. 4:4), got {text!r}") from None


def parse_float_range(text: str, flag: str) -> tuple[float, float]:
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError:
        raise ConfigError(f"--{flag} expects LO:HI (e.g. 0.7:0.95), got {text!r}") from None


def _add_env_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid", help="grid shape RxC")
    parser.add_argument("--qubits", help="qubit capacity range LO:HI")
    parser.add_argument("--channels", help="channel capacity range LO:HI")
    parser.add_argument("--fidelity", help="link fidelity range LO:HI")
    parser.add_argument("--pe", type=float, help="ebit generation success probability")
    parser.add_argument("--qv", type=float, help="swap success probability")
    parser.add_argument("--fmin", type=float, help="required end-to-end fidelity")
    parser.add_argument("--requests", type=int, help="requests per episode")
    parser.add_argument("--k-paths", type=int, dest="k_paths", help="candidate paths per request")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qudqn",
                                     description="Entanglement-routing simulator and DQN benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-topology", help="sample a grid topology and write it as JSON")
    _add_env_flags(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--config")

    p = sub.add_parser("train", help="train the routing agent and save a checkpoint")
    _add_env_flags(p)
    p.add_argument("--train-episodes", type=int, dest="train_episodes")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="checkpoint path")
    p.add_argument("--log", help="training log CSV path")
    p.add_argument("--config")

    p = sub.add_parser("evaluate", help="evaluate a policy and write metric rows")
    _add_env_flags(p)
    p.add_argument("--policy", choices=list(POLICIES))
    p.add_argument("--episodes", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="metrics CSV path")
    p.add_argument("--checkpoint", help="checkpoint to evaluate (policy qudqn)")
    p.add_argument("--summary", help="summary JSON path (default: print to stdout)")
    p.add_argument("--scenario-name", dest="scenario_name")
    p.add_argument("--config")

    p = sub.add_parser("compare", help="compare summary JSON files of one scenario")
    p.add_argument("--summaries", nargs="+", required=True)

    p = sub.add_parser("suite", help="run the benchmark scenario suite")
    p.add_argument("--out", help="output directory")
    p.add_argument("--episodes", type=int)
    p.add_argument("--train-episodes", type=int, dest="train_episodes")
    p.add_argument("--seed", type=int)
    p.add_argument("--filter", help="only run scenarios whose name contains this substring")
    p.add_argument("--workers", type=int, help="parallel evaluation replications")
    p.add_argument("--config")
    return parser


def _settings(args: argparse.Namespace, keys: list[str]) -> dict:
    """defaults < config file < explicit flags."""
    from_file = {}
    config_path = getattr(args, "config", None)
    if config_path:
        from_file = json.loads(Path(config_path).read_text())
        for key in from_file:
            if key not in _DEFAULTS:
                raise ConfigError(f"unknown config file key {key!r}")
    merged = {}
    for key in keys:
        value = getattr(args, key, None)
        if value is None:
            value = from_file.get(key, _DEFAULTS.get(key))
        merged[key] = value
    if merged.get("seed") is not None and merged["seed"] < 0:
        raise ConfigError(f"seed must be >= 0, got {merged['seed']}")
    return merged


def _env_config(s: dict) -> EnvConfig:
    rows, cols = parse_grid(s["grid"])
    return EnvConfig(
        grid=TopologyConfig(
            rows=rows, cols=cols,
            qubit_capacity_range=parse_int_range(s["qubits"], "qubits"),
            channel_capacity_range=parse_int_range(s["channels"], "channels"),
            fidelity_range=parse_float_range(s["fidelity"], "fidelity"),
        ),
        topology_seed=s["seed"],
        demand_count=s["requests"],
        k_paths=s["k_paths"],
        phys=PhysParams(p_e=s["pe"], q_v=s["qv"], f_min=s["fmin"]),
        reward=RewardParams(),
    )


def _require_out(s: dict) -> str:
    if not s["out"]:
        raise ConfigError("--out is required")
    return s["out"]


def cmd_gen_topology(args) -> int:
    s = _settings(args, ["grid", "qubits", "channels", "fidelity", "seed", "out"])
    rows, cols = parse_grid(s["grid"])
    cfg = TopologyConfig(
        rows=rows, cols=cols,
        qubit_capacity_range=parse_int_range(s["qubits"], "qubits"),
        channel_capacity_range=parse_int_range(s["channels"], "channels"),
        fidelity_range=parse_float_range(s["fidelity"], "fidelity"),
    )
    save_topology(grid_topology(cfg, s["seed"]), _require_out(s))
    return 0


def cmd_train(args) -> int:
    s = _settings(args, ["grid", "qubits", "channels", "fidelity", "pe", "qv", "fmin",
                         "requests", "k_paths", "train_episodes", "seed", "out", "log"])
    env_cfg = _env_config(s)
    train_cfg = TrainConfig(
        episodes=s["train_episodes"],
        epsilon_decay_steps=max(1, s["train_episodes"] * s["requests"] * 2))
    mlp, log = train(env_cfg, train_cfg, s["seed"])
    save_checkpoint(mlp, _require_out(s), global_step=len(log))
    if s["log"]:
        write_training_log(log, s["log"])
    return 0


def cmd_evaluate(args) -> int:
    s = _settings(args, ["grid", "qubits", "channels", "fidelity", "pe", "qv", "fmin",
                         "requests", "k_paths", "policy", "episodes", "seed", "out",
                         "checkpoint", "summary", "scenario_name"])
    env_cfg = _env_config(s)
    mlp = None
    if s["policy"] == "qudqn":
        if not s["checkpoint"]:
            raise ConfigError("--checkpoint is required for --policy qudqn")
        mlp, _ = load_checkpoint(s["checkpoint"])
    records = evaluate(s["policy"], env_cfg, s["episodes"], s["seed"], mlp=mlp)
    name = s["scenario_name"] or f"adhoc-{s['grid']}-r{s['requests']}"
    rows = rows_from_records(name, s["policy"], s["seed"], records)
    write_metrics_csv(rows, _require_out(s))
    summary = {"scenario": name, "seed": s["seed"], "episodes": s["episodes"],
               "policies": summarize_rows(rows)}
    text = json.dumps(summary, indent=2, sort_keys=True)
    if s["summary"]:
        Path(s["summary"]).write_text(text + "\n")
    else:
        print(text)
    return 0


def cmd_compare(args) -> int:
    summaries = [json.loads(Path(p).read_text()) for p in args.summaries]
    try:
        table = compare(summaries)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    print(f"scenario: {table['scenario']}")
    for policy, stats in sorted(table["policies"].items()):
        print(f"  {policy}: resolved {stats['resolved_mean']:.3f} "
              f"qubits {stats['qubits_used_mean']:.3f} "
              f"channels {stats['channels_used_mean']:.3f}")
    for pair, entry in sorted(table["differences"].items()):
        parts = ", ".join(
            f"{metric[:-4]} {value:+.2f}%" if value is not None else f"{metric[:-4]} n/a"
            for metric, value in entry.items())
        print(f"  {pair}: {parts}")
    return 0


def cmd_suite(args) -> int:
    s = _settings(args, ["out", "episodes", "train_episodes", "seed", "filter", "workers"])
    out_dir = _require_out(s)
    scenarios = scenario_suite()
    if s["filter"]:
        scenarios = [sc for sc in scenarios if s["filter"] in sc.name]
        if not scenarios:
            raise ConfigError(f"no scenario matches filter {s['filter']!r}")
    # an override applies when set explicitly or via config file; otherwise
    # each scenario keeps its own operating point
    overrides = {}
    for key in ("episodes", "train_episodes"):
        if getattr(args, key, None) is not None or s[key] != _DEFAULTS[key]:
            overrides[key] = s[key]
    seed = None
    if getattr(args, "seed", None) is not None or s["seed"] != _DEFAULTS["seed"]:
        seed = s["seed"]
    for scenario in scenarios:
        summary = run_scenario(scenario, out_dir, seed=seed, workers=s["workers"] or 1,
                               **overrides)
        resolved = {p: round(v["resolved_mean"], 3) for p, v in summary["policies"].items()}
        print(f"{scenario.name}: {resolved}")
    return 0


_COMMANDS = {
    "gen-topology": cmd_gen_topology,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "compare": cmd_compare,
    "suite": cmd_suite,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
