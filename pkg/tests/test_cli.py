import csv
import json
from pathlib import Path

import pytest
import yaml

from timedelay.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _write(tmp_path, data, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(data))
    return str(p)


def _run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def _read_csv(path):
    lines = Path(path).read_text().splitlines()
    assert lines[0].startswith("# timedelay-csv v1")
    return list(csv.DictReader(lines[1:]))


def test_validate_reference_config(capsys):
    code, out, _ = _run(["validate", str(CONFIGS / "friedrichs_time_delay.yaml")], capsys)
    assert code == 0
    assert out.strip().endswith("ok")
    echoed = yaml.safe_load("\n".join(l for l in out.splitlines() if l != "ok"))
    # every default is explicit in the echo
    assert echoed["sojourn"]["quad_tol"] == 1e-9
    assert echoed["tolerances"]["relative_gap"] == 0.05


def test_validate_kappa_violation(capsys):
    code, _, err = _run(["validate", str(CONFIGS / "kappa_violation.yaml")], capsys)
    assert code == 2
    assert "state.momentum" in err and "kappa-window" in err


def test_validate_non_integrable_f(capsys):
    code, _, err = _run(["validate", str(CONFIGS / "nonintegrable_f.yaml")], capsys)
    assert code == 2
    assert "localization.rho" in err and "non-integrable" in err


@pytest.mark.parametrize("data,path", [
    ({}, "experiment"),
    ({"experiment": "nope"}, "experiment"),
    ({"experiment": "stationary_trace", "model": [{"profile": "lorentzian", "coupling": "x"}]},
     "model[0].coupling"),
    ({"experiment": "friedrichs_time_delay", "sojourn": {"r_schedul": [1]}}, "sojourn.r_schedul"),
    ({"experiment": "friedrichs_time_delay", "grid": {"n_points": 1000}}, "grid.n_points"),
    ({"experiment": "stationary_trace", "grid": {}}, "grid"),
    ({"experiment": "integral_formula", "sojourn": {"r_schedule": [4, 2]}}, "sojourn.r_schedule"),
])
def test_schema_errors_name_the_field(tmp_path, capsys, data, path):
    for cmd in ("validate", "run"):
        code, _, err = _run([cmd, _write(tmp_path, data), "--out-dir", str(tmp_path)], capsys)
        assert code == 2
        assert f"error: {path}" in err


def test_unreadable_config(tmp_path, capsys):
    code, _, err = _run(["validate", str(tmp_path / "missing.yaml")], capsys)
    assert code == 2 and "cannot read" in err


def test_zero_coupling_run(tmp_path, capsys):
    code, out, _ = _run(["run", str(CONFIGS / "friedrichs_time_delay_free.yaml"),
                         "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    rows = _read_csv(tmp_path / "friedrichs_time_delay_free.csv")
    assert list(rows[0]) == ["r", "T0_r", "T0_r_S", "T_r", "tau_r", "tau_in_r", "tau_free", "tail"]
    assert all(float(r["tau_r"]) == 0.0 and float(r["tau_in_r"]) == 0.0 for r in rows)
    summary = json.loads((tmp_path / "friedrichs_time_delay_free.json").read_text())
    assert summary["passed"] and summary["status"] == "passed"
    assert summary["results"]["ew_reference"] == 0.0
    assert sorted(summary["artifacts"]) == sorted(
        ["friedrichs_time_delay_free.csv", "friedrichs_time_delay_free.svg",
         "friedrichs_time_delay_free.json"])
    assert (tmp_path / "friedrichs_time_delay_free.svg").read_text().lstrip().startswith("<?xml")


def test_localization_properties_default(tmp_path, capsys):
    data = {"experiment": "localization_properties"}
    code, _, _ = _run(["run", _write(tmp_path, data), "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    summary = json.loads((tmp_path / "localization_properties.json").read_text())
    names = [c["name"] for c in summary["checks"]]
    assert len(names) == len(set(names))
    assert all(c["passed"] for c in summary["checks"])


def test_deterministic_outputs(tmp_path, capsys):
    cfg = str(CONFIGS / "stationary_trace_rank2.yaml")
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run(["run", cfg, "--out-dir", str(a), "--threads", "1"], capsys)[0] == 0
    assert _run(["run", cfg, "--out-dir", str(b), "--threads", "3"], capsys)[0] == 0
    for ext in ("csv", "json"):
        name = f"stationary_trace_rank2.{ext}"
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_seed_override(tmp_path, capsys):
    data = {"experiment": "localization_properties",
            "localization_properties": {"n_samples": 5, "n_oracle": 0}}
    cfg = _write(tmp_path, data)
    _run(["run", cfg, "--out-dir", str(tmp_path / "s0")], capsys)
    _run(["run", cfg, "--out-dir", str(tmp_path / "s7"), "--seed", "7"], capsys)
    j0 = json.loads((tmp_path / "s0" / "localization_properties.json").read_text())
    j7 = json.loads((tmp_path / "s7" / "localization_properties.json").read_text())
    assert j0["seed"] == 0 and j7["seed"] == 7
    assert j0["config_hash"] != j7["config_hash"]
    c0 = (tmp_path / "s0" / "localization_properties.csv").read_text()
    c7 = (tmp_path / "s7" / "localization_properties.csv").read_text()
    assert c0.splitlines()[2] != c7.splitlines()[2]


def test_non_convergence_exit_code(tmp_path, capsys):
    data = {"experiment": "wave_operator_decay",
            "grid": {"n_points": 1024, "x_min": -20.0, "x_max": 20.0},
            "model": [{"profile": "lorentzian"}], "wave_operator": {"T_max": 10.0}}
    code, _, err = _run(["run", _write(tmp_path, data), "--out-dir", str(tmp_path)], capsys)
    assert code == 3
    assert "stage 'wave_operator'" in err
    summary = json.loads((tmp_path / "wave_operator_decay.json").read_text())
    assert summary["status"] == "not_converged" and summary["stage"] == "wave_operator"


def test_reference_time_delay_run(tmp_path, capsys):
    code, out, _ = _run(["run", str(CONFIGS / "friedrichs_time_delay.yaml"),
                         "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    summary = json.loads((tmp_path / "friedrichs_time_delay.json").read_text())
    assert summary["results"]["relative_gap"] <= 0.05
    assert summary["results"]["ew_reference"] == pytest.approx(-0.4354542319851127, abs=1e-9)
    assert "PASS  relative_gap" in out
