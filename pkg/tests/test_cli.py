import json
import subprocess
import sys

import pytest

from prefplan import io as pio
from prefplan.cli import main


@pytest.fixture()
def toy_files(tmp_path):
    assert main(["scenario", "toy", "--out-dir", str(tmp_path)]) == 0
    return [str(tmp_path / f) for f in ("mdp.json", "objectives.json", "preferences.json")]


def test_scenario_toy_then_validate(toy_files, capsys):
    assert main(["validate", toy_files[0]]) == 0
    assert "valid: 6 states" in capsys.readouterr().out


def test_truncated_file(tmp_path):
    path = tmp_path / "mdp.json"
    path.write_text('{"states": 3, "act', encoding="utf-8")
    assert main(["validate", str(path)]) == 2


def test_missing_file(tmp_path):
    assert main(["validate", str(tmp_path / "nope.json")]) == 2


def test_short_distribution(tmp_path, capsys):
    body = {"states": 1, "actions": ["a"], "initial": 0, "transitions": [[0, 0, 0, "9/10"]]}
    path = tmp_path / "mdp.json"
    path.write_text(json.dumps(body), encoding="utf-8")
    assert main(["validate", str(path)]) == 1
    out = capsys.readouterr().out
    assert "state 0" in out and "sum" in out


def test_solve_toy(toy_files, tmp_path, capsys):
    out = tmp_path / "strategy.json"
    product = tmp_path / "product.json"
    assert main(["solve", *toy_files, "--mode", "sasi", "--out", str(out), "--product-out", str(product)]) == 0
    text = capsys.readouterr().out
    assert "initial state winning" in text
    assert "actions at initial state: b, c" in text
    _, init, choices = pio.strategy_choices_from_dict(json.loads(out.read_text()))
    assert init == 1 and choices[(0, 1)] == {"b", "c"}
    assert json.loads(product.read_text())["states"] == 12


def test_rank_toy(toy_files, tmp_path, capsys):
    out = tmp_path / "ranks.csv"
    assert main(["rank", *toy_files, "--mode", "sasi", "--out", str(out)]) == 0
    assert "max rank 1" in capsys.readouterr().out
    assert pio.parse_rank_csv(out.read_text())["s0"] == 1
    assert main(["rank", *toy_files, "--mode", "both", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "state,rank_sasi,rank_spi"


def test_simulate_toy(toy_files, tmp_path, capsys):
    prefix = tmp_path / "sim"
    assert main(["simulate", *toy_files, "--runs", "10000", "--horizon", "12", "--seed", "4", "--out", str(prefix)]) == 0
    summary = json.loads((tmp_path / "sim.json").read_text())
    assert summary["fraction_at_least"]["1"] == 1.0
    assert summary["seed"] == 4 and summary["rank"] == 1
    assert len((tmp_path / "sim.csv").read_text().splitlines()) == 10_001
    assert ">= 1 improvements: 1.0000" in capsys.readouterr().out


def test_simulate_is_deterministic(toy_files, tmp_path):
    for name in ("x", "y"):
        assert main(["simulate", *toy_files, "--runs", "50", "--seed", "2", "--out", str(tmp_path / name)]) == 0
    assert (tmp_path / "x.csv").read_text() == (tmp_path / "y.csv").read_text()


def test_seed_from_environment(toy_files, tmp_path, monkeypatch):
    monkeypatch.setenv("PREFPLAN_SEED", "17")
    assert main(["simulate", *toy_files, "--runs", "5", "--out", str(tmp_path / "s")]) == 0
    assert json.loads((tmp_path / "s.json").read_text())["seed"] == 17
    monkeypatch.setenv("PREFPLAN_SEED", "many")
    assert main(["simulate", *toy_files, "--runs", "5", "--out", str(tmp_path / "s")]) == 2


@pytest.mark.parametrize("extra", [["--runs", "0"], ["--horizon", "0"], ["--start", "99"]])
def test_simulate_usage_errors(toy_files, tmp_path, extra):
    assert main(["simulate", *toy_files, *extra, "--out", str(tmp_path / "s")]) == 2


def test_usage_errors(toy_files):
    assert main([]) == 2
    assert main(["solve", *toy_files]) == 2
    assert main(["scenario", "toy", "--config", "x.json"]) == 2


def test_mismatched_preferences(toy_files, tmp_path):
    prefs = tmp_path / "p2.json"
    prefs.write_text(json.dumps({"objectives": ["X", "Y"], "prefers": []}), encoding="utf-8")
    assert main(["rank", toy_files[0], toy_files[1], str(prefs), "--out", str(tmp_path / "r.csv")]) == 2


def test_scenario_gridworld_custom_config(tmp_path, capsys):
    config = tmp_path / "grid.json"
    config.write_text(json.dumps({
        "rows": 3, "cols": 3, "regions": {"A": [0, 0], "B": [2, 2]},
        "availability_order": ["A", "B"], "initial_availability": [1, 1],
        "initial_cell": [1, 1], "battery_capacity": 5, "initial_battery": 5,
        "preferences": [["B", "A"]],
    }), encoding="utf-8")
    assert main(["scenario", "gridworld", "--config", str(config), "--out-dir", str(tmp_path / "g")]) == 0
    assert main(["validate", str(tmp_path / "g" / "mdp.json")]) == 0
    assert "valid: 54 states" in capsys.readouterr().out


def test_scenario_gridworld_bad_config(tmp_path):
    config = tmp_path / "grid.json"
    config.write_text(json.dumps({"rows": 2, "cols": 2, "battery_capacity": 0, "initial_battery": 0}), encoding="utf-8")
    assert main(["scenario", "gridworld", "--config", str(config), "--out-dir", str(tmp_path)]) == 1
    config.write_text(json.dumps({"rows": 2, "wheels": 4}), encoding="utf-8")
    assert main(["scenario", "gridworld", "--config", str(config), "--out-dir", str(tmp_path)]) == 2


def test_scenario_emit_parse_emit(tmp_path):
    assert main(["scenario", "toy", "--out-dir", str(tmp_path)]) == 0
    text = (tmp_path / "mdp.json").read_text()
    assert pio.dumps_mdp(pio.load_mdp(tmp_path / "mdp.json")) == text
    text = (tmp_path / "preferences.json").read_text()
    assert pio.dumps_preferences(pio.load_preferences(tmp_path / "preferences.json")) == text


def test_not_winning_exits_one(tmp_path):
    body = {"states": 2, "actions": ["a"], "initial": 0, "transitions": [[0, 0, 1, "1"], [1, 0, 1, "1"]]}
    (tmp_path / "m.json").write_text(json.dumps(body), encoding="utf-8")
    (tmp_path / "o.json").write_text(json.dumps({"objectives": [{"name": "F1", "states": [1]}]}), encoding="utf-8")
    (tmp_path / "p.json").write_text(json.dumps({"objectives": ["F1"]}), encoding="utf-8")
    files = [str(tmp_path / n) for n in ("m.json", "o.json", "p.json")]
    out = tmp_path / "s.json"
    assert main(["solve", *files, "--out", str(out)]) == 1
    assert out.exists()


def test_console_entry_point(tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "prefplan.cli", "scenario", "toy", "--out-dir", str(tmp_path)],
        capture_output=True, text=True, check=False,
    )
    assert result.returncode == 0
    assert "toy: 6 states" in result.stdout
