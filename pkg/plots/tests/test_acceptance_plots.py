"""Acceptance: every figure kind renders from a generated sample CSV and the
sidecar aggregates equal independently recomputed CSV means to 1e-9."""

import csv
import json
import math

import pytest

from qudqn_plots.cli import main
from qudqn_plots.render import KINDS


@pytest.fixture
def sample_inputs(tmp_path):
    metrics = tmp_path / "metrics.csv"
    header = ("scenario,policy,seed,episode,resolved,total_requests,"
              "qubits_used,channels_used,mean_fidelity,steps").split(",")
    with open(metrics, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=header)
        writer.writeheader()
        for scenario in ("demand-10", "demand-20", "demand-30"):
            total = int(scenario.split("-")[1])
            for policy in ("qudqn", "shortest", "random"):
                for episode in range(6):
                    resolved = max(0, total - episode - (0 if policy == "qudqn" else 3))
                    writer.writerow({
                        "scenario": scenario, "policy": policy, "seed": 9,
                        "episode": episode, "resolved": resolved,
                        "total_requests": total, "qubits_used": 2 * resolved,
                        "channels_used": resolved, "mean_fidelity": 0.86,
                        "steps": resolved + 1})
    train_log = tmp_path / "train_log.csv"
    with open(train_log, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["episode", "return", "resolved", "loss_mean", "epsilon"])
        for episode in range(40):
            writer.writerow([episode, math.sin(episode / 5.0), episode % 4,
                             1.0 / (episode + 1), 0.5])
    return metrics, train_log


def column_means(path, value, transform=float):
    groups = {}
    with open(path, newline="") as handle:
        for row in csv.DictReader(handle):
            key = (row["policy"], row["scenario"])
            groups.setdefault(key, []).append(transform(row[value]))
    return {key: math.fsum(vals) / len(vals) for key, vals in groups.items()}


def test_all_kinds_render_with_exact_sidecars(sample_inputs, tmp_path):
    metrics, train_log = sample_inputs
    rendered = []
    for kind in KINDS:
        source = train_log if kind == "training_curve" else metrics
        out = tmp_path / f"{kind}.png"
        assert main(["--csv", str(source), "--kind", kind, "--out", str(out)]) == 0
        assert out.exists() and out.stat().st_size > 0
        rendered.append(kind)
        sidecar = json.loads((tmp_path / f"{kind}.png.json").read_text())
        if kind == "training_curve":
            assert len(sidecar["series"]["return"]) == 40
            continue
        if kind == "throughput_line":
            ratios = {}
            with open(metrics, newline="") as handle:
                for row in csv.DictReader(handle):
                    key = (row["policy"], row["scenario"])
                    ratios.setdefault(key, []).append(
                        float(row["resolved"]) / float(row["total_requests"]))
            expected = {k: math.fsum(v) / len(v) for k, v in ratios.items()}
        else:
            value = {"resolved_bar": "resolved", "qubit_bar": "qubits_used",
                     "channel_bar": "channels_used"}[kind]
            expected = column_means(metrics, value)
        for (policy, scenario), value_mean in expected.items():
            got = sidecar["aggregates"][policy][scenario]
            assert abs(got - value_mean) <= 1e-9, (kind, policy, scenario)
    assert rendered == list(KINDS)
    print("\nACCEPTANCE PASS — all figure kinds render; sidecars match recomputed means")
