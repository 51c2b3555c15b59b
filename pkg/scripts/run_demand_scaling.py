#!/usr/bin/env python3
"""Demand-scaling experiment: 7x7 grid, 20 qubits/node, 10..30 requests."""

from __future__ import annotations

import argparse

from qudqn.bench import run_scenario, scenario_suite


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/demand_scaling")
    parser.add_argument("--episodes", type=int, default=100)
    parser.add_argument("--train-episodes", type=int, default=300)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    for scenario in scenario_suite():
        if not scenario.name.startswith("demand-"):
            continue
        summary = run_scenario(scenario, args.out, episodes=args.episodes,
                               train_episodes=args.train_episodes, seed=args.seed,
                               workers=args.workers)
        stats = summary["policies"]
        line = ", ".join(
            f"{p}: {v['resolved_mean']:.2f}/{scenario.demand_count} resolved, "
            f"{v['qubits_used_mean']:.1f} qubits, {v['channels_used_mean']:.1f} channels"
            for p, v in sorted(stats.items()))
        print(f"{scenario.name}: {line}")
    print(f"CSV + summaries written to {args.out}/")


if __name__ == "__main__":
    main()
