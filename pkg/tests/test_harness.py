import copy
import json
import subprocess
import sys

import numpy as np
import pytest

from fadingkf.errors import ConfigurationError
from fadingkf.harness import (
    compare_controllers,
    load_scenario,
    parse_trace_csv,
    run_scenario,
    scenario_variant,
    sweep,
    write_summary,
    write_trace_csv,
)

BASE = {
    "name": "unit", "seed": 99, "horizon": 60,
    "plant": {
        "A": [[1.6718, -0.9948], [1, 0]],
        "Q": [[0.5, 0], [0, 0.5]],
        "P0": [[0.3, 0], [0, 0.3]],
        "sensors": [
            {"C": [1, 0], "R": 0.01, "rates": [3, 4, 5, 6, 7, 8]},
            {"C": [0, 1], "R": 0.01, "rates": [3, 4, 5, 6, 7, 8]},
        ],
    },
    "ber": {"kind": "exponential", "n0": 2.5e-16},
    "links": {"sensor_gw": [
        {"a": 0.998, "mean_db": -104, "mode": "predicted"},
        {"a": 0.998, "mean_db": -106, "mode": "predicted"},
    ]},
    "energy": {"bit_rate": 1e8, "u_max": [3e-4, 3e-4]},
    "controller": {
        "type": "predictive", "energy_weight": 1e6,
        "increments": [3e-5, -3e-5], "u_init": [1.5e-4, 1.5e-4],
        "menu": ["sdc"],
    },
}


def scenario(**changes):
    cfg = copy.deepcopy(BASE)
    for key, val in changes.items():
        parts = key.split(".")
        node = cfg
        for p in parts[:-1]:
            node = node[p]
        node[parts[-1]] = val
    return load_scenario(cfg)


def test_determinism_byte_identical(tmp_path):
    sc = scenario()
    rec1, _ = run_scenario(sc)
    rec2, _ = run_scenario(sc)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_trace_csv(p1, rec1)
    write_trace_csv(p2, rec2)
    assert p1.read_bytes() == p2.read_bytes()


def test_different_seed_different_trace():
    rec1, _ = run_scenario(scenario())
    rec2, _ = run_scenario(scenario(seed=100))
    assert any(a != b for a, b in zip(rec1, rec2))


def test_trace_round_trip(tmp_path):
    sc = scenario(horizon=25)
    records, _ = run_scenario(sc)
    path = tmp_path / "trace.csv"
    write_trace_csv(path, records)
    back = parse_trace_csv(path)
    assert back == records


def test_metrics_recomputable_from_csv(tmp_path):
    from fadingkf.analysis import compute_metrics

    sc = scenario(horizon=40)
    records, metrics = run_scenario(sc)
    path = tmp_path / "trace.csv"
    write_trace_csv(path, records)
    again = compute_metrics(parse_trace_csv(path))
    assert again.V_bar == metrics.V_bar
    assert again.E_total == metrics.E_total


def test_single_step_all_powers_zero():
    sc = scenario(**{"controller.u_init": [0.0, 0.0],
                     "controller.increments": [0.0], "horizon": 1})
    records, metrics = run_scenario(sc)
    assert metrics.E_total == 0.0
    assert records[0].theta == (0, 0)
    assert records[0].tr_post == pytest.approx(records[0].tr_prior)
    assert records[0].tr_prior == pytest.approx(0.6)


def test_summary_contents(tmp_path):
    sc = scenario(horizon=10)
    _, metrics = run_scenario(sc)
    path = tmp_path / "summary.json"
    write_summary(path, sc, metrics)
    doc = json.loads(path.read_text())
    assert doc["seed"] == 99
    assert len(doc["config_hash"]) == 16
    assert set(doc["metrics"]) >= {"V_bar", "phi", "D_emp", "E_total"}


def test_compare_controller_with_itself():
    sc = scenario(horizon=30)
    rows = compare_controllers(sc, [("a", {}), ("b", {})])
    assert rows[1]["V_gain_pct"] == pytest.approx(0.0)
    assert rows[1]["energy_gain_pct"] == pytest.approx(0.0)


def test_sweep_single_point_matches_run():
    sc = scenario(horizon=30)
    rows = sweep(sc, "energy_weight", [1e6])
    _, metrics = run_scenario(sc)
    assert rows[0]["V_bar"] == pytest.approx(metrics.V_bar)
    assert rows[0]["E_total"] == pytest.approx(metrics.E_total)


def test_sweep_energy_non_increasing_in_weight():
    sc = scenario(horizon=120)
    rows = sweep(sc, "energy_weight", [1e4, 1e5, 1e6, 1e7])
    energies = [r["E_total"] for r in rows]
    assert all(a >= b - 1e-15 for a, b in zip(energies, energies[1:]))


def test_common_random_numbers_share_channels():
    sc = scenario(horizon=30)
    rec_a, _ = run_scenario(sc)
    rec_b, _ = run_scenario(scenario_variant(sc, scheme_menu=("sdc", "zec", "mdc")))
    assert all(a.gain_db == b.gain_db for a, b in zip(rec_a, rec_b))


def test_known_mode_runs():
    sc = scenario(**{"links.sensor_gw": [
        {"a": 0.998, "mean_db": -104, "mode": "known"},
        {"a": 0.998, "mean_db": -106, "mode": "known"},
    ], "horizon": 20})
    records, _ = run_scenario(sc)
    assert len(records) == 20


def test_fsmc_mode_runs():
    sc = scenario(**{"links.sensor_gw": [
        {"a": 0.995, "mean_db": -104, "mode": "fsmc"},
        {"a": 0.995, "mean_db": -106, "mode": "fsmc"},
    ], "horizon": 20, "fsmc": {"states": 8, "training_steps": 4000}})
    records, _ = run_scenario(sc)
    assert len(records) == 20


def test_config_validation_messages():
    with pytest.raises(ConfigurationError, match="horizon"):
        scenario(horizon=0)
    with pytest.raises(ConfigurationError, match="sensor_gw"):
        scenario(**{"links.sensor_gw": []})
    with pytest.raises(ConfigurationError, match="u_init"):
        scenario(**{"controller.u_init": [1.0, 1.0]})
    bad = copy.deepcopy(BASE)
    del bad["plant"]
    with pytest.raises(ConfigurationError, match="plant"):
        load_scenario(bad)
    relay_bad = copy.deepcopy(BASE)
    relay_bad["relays"] = {"mu_max": [6e-5]}
    relay_bad["controller"]["menu"] = ["sdc", "mdc"]
    with pytest.raises(ConfigurationError, match="relay"):
        load_scenario(relay_bad)


def _run_cli(args, cwd):
    return subprocess.run([sys.executable, "-m", "fadingkf.cli", *args],
                          capture_output=True, text=True, cwd=cwd)


def test_cli_simulate_and_exit_codes(tmp_path):
    cfg_path = tmp_path / "scenario.json"
    cfg = copy.deepcopy(BASE)
    cfg["horizon"] = 15
    cfg_path.write_text(json.dumps(cfg))
    out = _run_cli(["simulate", str(cfg_path), "--out", str(tmp_path / "out")], tmp_path)
    assert out.returncode == 0, out.stderr
    assert (tmp_path / "out" / "summary.json").exists()
    assert (tmp_path / "out" / "trace.csv").exists()

    bad = copy.deepcopy(cfg)
    bad["horizon"] = -1
    cfg_path.write_text(json.dumps(bad))
    out = _run_cli(["simulate", str(cfg_path), "--out", str(tmp_path / "out2")], tmp_path)
    assert out.returncode == 2

    out = _run_cli(["simulate", str(tmp_path / "missing.json")], tmp_path)
    assert out.returncode == 2


def test_cli_mdc_curve(tmp_path):
    out = _run_cli(["mdc-curve", "--rate", "9", "--power", "5e-5",
                    "--out", str(tmp_path), "--points", "41"], tmp_path)
    assert out.returncode == 0, out.stderr
    lines = (tmp_path / "mdc_curve.csv").read_text().strip().splitlines()
    assert lines[0] == "gain_db,sdc,mdc2,mdc3"
    assert len(lines) == 42


def test_estimate_nu_closed_loop():
    from fadingkf.harness import estimate_nu_closed_loop

    sc = scenario(**{"ber": {"kind": "constant", "beta0": 0.02},
                     "controller.increments": [0.0], "horizon": 40,
                     "plant.sensors": [
                         {"C": [1, 0], "R": 0.01, "rates": [3]},
                         {"C": [0, 1], "R": 0.01, "rates": [3]}]})
    nu_max, per_state = estimate_nu_closed_loop(sc, samples=4000)
    exact = 1 - ((1 - 0.02) ** 3) ** 2
    assert len(per_state) == 40
    sigma = (exact * (1 - exact) / 4000) ** 0.5
    assert abs(nu_max - exact) <= 4 * sigma + 0.01


def test_cli_compare_sweep_bound_manifests(tmp_path):
    cfg = copy.deepcopy(BASE)
    cfg["horizon"] = 12
    cfg_path = tmp_path / "scenario.json"
    cfg_path.write_text(json.dumps(cfg))

    out = _run_cli(["compare", str(cfg_path), "--menus", "sdc", "--with-simple",
                    "--out", str(tmp_path / "cmp")], tmp_path)
    assert out.returncode == 0, out.stderr
    manifest = json.loads((tmp_path / "cmp" / "manifest.json").read_text())
    assert manifest["seed"] == 99 and "config_hash" in manifest
    assert (tmp_path / "cmp" / "comparison.csv").exists()

    out = _run_cli(["sweep", str(cfg_path), "--param", "energy_weight",
                    "--grid", "1e5,1e6", "--out", str(tmp_path / "sw")], tmp_path)
    assert out.returncode == 0, out.stderr
    assert (tmp_path / "sw" / "sweep.csv").exists()
    assert (tmp_path / "sw" / "manifest.json").exists()

    bound_cfg = copy.deepcopy(BASE)
    bound_cfg["horizon"] = 30
    bound_cfg["ber"] = {"kind": "constant", "beta0": 0.02}
    bound_cfg["controller"]["increments"] = [0.0]
    bound_cfg["plant"]["sensors"] = [
        {"C": [1, 0], "R": 0.01, "rates": [3]},
        {"C": [0, 1], "R": 0.01, "rates": [3]}]
    cfg_path.write_text(json.dumps(bound_cfg))
    out = _run_cli(["bound", str(cfg_path), "--replications", "10",
                    "--out", str(tmp_path / "bd")], tmp_path)
    assert out.returncode == 0, out.stderr
    report = json.loads((tmp_path / "bd" / "bound.json").read_text())
    assert report["pass"] is True

    out = _run_cli(["fsmc", str(cfg_path), "--states", "6",
                    "--out", str(tmp_path / "fs")], tmp_path)
    assert out.returncode == 0, out.stderr
    doc = json.loads((tmp_path / "fs" / "fsmc.json").read_text())
    assert doc["states"] >= 1 and len(doc["transitions"]) == doc["states"]
