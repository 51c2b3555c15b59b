#!/usr/bin/env python3
"""Grid-scaling experiment: 5x5..10x10 grids with 5..10 requests, 4 qubits/node.

Desk-scale by default; pass --episodes 500 --train-episodes 2000 for the full
operating point.
"""

from __future__ import annotations

import argparse

from qudqn.bench import run_scenario, scenario_suite


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/grid_scaling")
    parser.add_argument("--episodes", type=int, default=100)
    parser.add_argument("--train-episodes", type=int, default=300)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    for scenario in scenario_suite():
        if not scenario.name.startswith("grid-"):
            continue
        summary = run_scenario(scenario, args.out, episodes=args.episodes,
                               train_episodes=args.train_episodes, seed=args.seed,
                               workers=args.workers)
        resolved = {p: round(v["resolved_mean"], 3) for p, v in summary["policies"].items()}
        print(f"{scenario.name}: mean resolved {resolved}")
    print(f"CSV + summaries written to {args.out}/")


if __name__ == "__main__":
    main()
