import json

import pytest

from qudqn.bench import CSV_HEADER, read_metrics_csv
from qudqn.cli import main, parse_grid, parse_int_range
from qudqn.topology import ConfigError, load_topology


def test_parse_helpers():
    assert parse_grid("5x5") == (5, 5)
    assert parse_grid("4X7") == (4, 7)
    assert parse_int_range("26:35", "channels") == (26, 35)
    with pytest.raises(ConfigError):
        parse_grid("5by5")
    with pytest.raises(ConfigError):
        parse_int_range("26..35", "channels")


def test_gen_topology_writes_loadable_json(tmp_path):
    out = tmp_path / "topo.json"
    code = main(["gen-topology", "--grid", "3x4", "--qubits", "4:6",
                 "--channels", "26:35", "--fidelity", "0.7:0.95",
                 "--seed", "5", "--out", str(out)])
    assert code == 0
    topo = load_topology(out)
    assert topo.n_nodes == 12
    assert topo.n_edges == 2 * 12 - 3 - 4


def test_gen_topology_bad_grid_exits_2(tmp_path, capsys):
    code = main(["gen-topology", "--grid", "oops", "--out", str(tmp_path / "t.json")])
    assert code == 2
    assert "grid" in capsys.readouterr().err


def test_evaluate_writes_contract_csv(tmp_path):
    out = tmp_path / "rows.csv"
    summary_path = tmp_path / "summary.json"
    code = main(["evaluate", "--policy", "shortest", "--grid", "2x2",
                 "--qubits", "4:4", "--fidelity", "0.9:0.95", "--fmin", "0.8",
                 "--requests", "2", "--episodes", "8", "--seed", "3",
                 "--out", str(out), "--summary", str(summary_path)])
    assert code == 0
    assert out.read_text().splitlines()[0] == CSV_HEADER
    assert len(read_metrics_csv(out)) == 8
    summary = json.loads(summary_path.read_text())
    assert "shortest" in summary["policies"]


def test_evaluate_qudqn_requires_checkpoint(tmp_path, capsys):
    code = main(["evaluate", "--policy", "qudqn", "--grid", "2x2",
                 "--requests", "2", "--episodes", "2", "--seed", "1",
                 "--out", str(tmp_path / "r.csv")])
    assert code == 2
    assert "checkpoint" in capsys.readouterr().err


def test_train_then_evaluate_checkpoint(tmp_path):
    ckpt = tmp_path / "net.json"
    log = tmp_path / "log.csv"
    code = main(["train", "--grid", "2x2", "--qubits", "4:4",
                 "--fidelity", "0.9:0.95", "--fmin", "0.8", "--requests", "2",
                 "--k-paths", "2", "--train-episodes", "5", "--seed", "2",
                 "--out", str(ckpt), "--log", str(log)])
    assert code == 0
    assert log.read_text().splitlines()[0] == "episode,return,resolved,loss_mean,epsilon"
    out = tmp_path / "agent.csv"
    code = main(["evaluate", "--policy", "qudqn", "--checkpoint", str(ckpt),
                 "--grid", "2x2", "--qubits", "4:4", "--fidelity", "0.9:0.95",
                 "--fmin", "0.8", "--requests", "2", "--k-paths", "2",
                 "--episodes", "4", "--seed", "2", "--out", str(out)])
    assert code == 0
    assert len(read_metrics_csv(out)) == 4


def test_checkpoint_dimension_mismatch_exits_2(tmp_path, capsys):
    ckpt = tmp_path / "net.json"
    main(["train", "--grid", "2x2", "--qubits", "4:4", "--fidelity", "0.9:0.95",
          "--fmin", "0.8", "--requests", "2", "--k-paths", "2",
          "--train-episodes", "1", "--seed", "2", "--out", str(ckpt)])
    code = main(["evaluate", "--policy", "qudqn", "--checkpoint", str(ckpt),
                 "--grid", "3x3", "--requests", "4", "--episodes", "2",
                 "--seed", "2", "--out", str(tmp_path / "r.csv")])
    assert code == 2
    assert "dims" in capsys.readouterr().err


def test_config_file_with_flag_override(tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({
        "grid": "2x2", "qubits": "4:4", "fidelity": "0.9:0.95", "fmin": 0.8,
        "requests": 2, "episodes": 6, "seed": 9}))
    out = tmp_path / "rows.csv"
    code = main(["evaluate", "--policy", "random", "--config", str(config),
                 "--episodes", "3", "--out", str(out)])
    assert code == 0
    assert len(read_metrics_csv(out)) == 3  # flag overrides the file's 6


def test_config_file_unknown_key_exits_2(tmp_path, capsys):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"gird": "2x2"}))
    code = main(["evaluate", "--policy", "random", "--config", str(config),
                 "--out", str(tmp_path / "r.csv")])
    assert code == 2
    assert "gird" in capsys.readouterr().err


def test_negative_seed_exits_2(tmp_path, capsys):
    code = main(["gen-topology", "--grid", "2x2", "--seed", "-4",
                 "--out", str(tmp_path / "t.json")])
    assert code == 2
    assert "seed" in capsys.readouterr().err


def test_unwritable_output_exits_3(tmp_path):
    code = main(["gen-topology", "--grid", "2x2",
                 "--out", str(tmp_path / "missing_dir" / "t.json")])
    assert code == 3


def test_compare_command(tmp_path, capsys):
    def summary(policy, resolved):
        return {"scenario": "s", "policies": {policy: {
            "resolved_mean": resolved, "qubits_used_mean": 10.0,
            "channels_used_mean": 5.0}}}
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    a.write_text(json.dumps(summary("shortest", 90.0)))
    b.write_text(json.dumps(summary("qudqn", 99.0)))
    assert main(["compare", "--summaries", str(a), str(b)]) == 0
    out = capsys.readouterr().out
    assert "qudqn_vs_shortest" in out and "+10.00%" in out


def test_compare_mismatch_exits_2(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    a.write_text(json.dumps({"scenario": "s1", "policies": {}}))
    b.write_text(json.dumps({"scenario": "s2", "policies": {}}))
    assert main(["compare", "--summaries", str(a), str(b)]) == 2


def test_suite_filter_and_overrides(tmp_path, capsys):
    code = main(["suite", "--out", str(tmp_path), "--filter", "illustration",
                 "--episodes", "3", "--train-episodes", "2", "--seed", "4"])
    assert code == 0
    assert (tmp_path / "illustration-4x5.csv").exists()
    assert (tmp_path / "illustration-4x5.summary.json").exists()
    rows = read_metrics_csv(tmp_path / "illustration-4x5.csv")
    assert len(rows) == 3 * 3  # three policies


def test_suite_unknown_filter_exits_2(tmp_path, capsys):
    assert main(["suite", "--out", str(tmp_path), "--filter", "nope"]) == 2
