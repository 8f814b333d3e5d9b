import csv
import json

import pytest

from kscompete import cli
from kscompete.config import (
    OUTPUT_ENV,
    Command,
    ConfigError,
    dump_config,
    load_config,
    spec_to_dict,
    with_axis_value,
)
from kscompete.model import ModelParams
from kscompete.solver import Advection, Scheme


def write(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def rows(path):
    with open(path) as fh:
        return [r for r in csv.reader(line for line in fh if not line.startswith("#"))]


def test_empty_config_gives_defaults(tmp_path):
    spec = load_config(write(tmp_path, {}), env={})
    assert spec.params == ModelParams()
    assert spec.solver_cfg.dx == 0.01 and spec.solver_cfg.dt == 0.01
    assert spec.command is Command.TABLE


def test_flags_override_file(tmp_path):
    spec = load_config(write(tmp_path, {"chi": 61.0, "lambda": 0.7}), {"chi": 100.0}, env={})
    assert spec.params.chi == 100.0 and spec.params.lam == 0.7


def test_env_output_dir_sits_between_file_and_flags(tmp_path):
    path = write(tmp_path, {"output_dir": "from_file"})
    assert str(load_config(path, env={OUTPUT_ENV: "from_env"}).output_dir) == "from_env"
    assert str(load_config(path, {"output_dir": "flag"}, env={OUTPUT_ENV: "from_env"}).output_dir) == "flag"


def test_competition_violation_names_a1(tmp_path):
    with pytest.raises(ConfigError) as err:
        load_config(write(tmp_path, {"a1": 1.5, "command": "table"}), env={})
    assert err.value.key == "a1" and "0 <= a1, a2 < 1" in err.value.message


def test_simulation_allows_strong_competition(tmp_path):
    spec = load_config(write(tmp_path, {"a1": 1.5, "command": "simulate"}), env={})
    assert spec.params.a1 == 1.5


@pytest.mark.parametrize(
    "data, key",
    [
        ({"chi": "big"}, "chi"),
        ({"bogus": 1}, "bogus"),
        ({"scheme": "RK4"}, "scheme"),
        ({"command": "sweep"}, "sweep_axis"),
        ({"sweep_axis": "nope", "sweep_values": [1]}, "sweep_axis"),
        ({"sweep_axis": "L", "sweep_values": []}, "sweep_values"),
        ({"scheme": "Explicit", "dt": 0.01}, "dt"),
        ({"d2": -0.1}, "d2"),
    ],
)
def test_bad_config_values(tmp_path, data, key):
    with pytest.raises(ConfigError) as err:
        load_config(write(tmp_path, data), env={})
    assert err.value.key == key


def test_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(path, env={})


def test_round_trip(tmp_path):
    spec = load_config(
        None,
        {
            "chi": 80.0,
            "L": 4.0,
            "scheme": "Explicit",
            "dt": 1e-5,
            "advection": "Upwind",
            "command": "sweep",
            "sweep_axis": "L",
            "sweep_values": [1.0, 2.0],
            "kmax": 9,
        },
        env={},
    )
    path = tmp_path / "out.json"
    dump_config(spec, path)
    again = load_config(path, env={})
    assert again == spec
    assert again.solver_cfg.scheme is Scheme.EXPLICIT and again.solver_cfg.advection is Advection.UPWIND
    assert spec_to_dict(again) == spec_to_dict(spec)


def test_axis_values_reach_solver_fields():
    spec = load_config(None, {"command": "sweep", "sweep_axis": "snapshot_every", "sweep_values": [5.0]}, env={})
    assert with_axis_value(spec, "snapshot_every", 5.0).solver_cfg.snapshot_every == 5
    assert with_axis_value(spec, "lambda", 2.0).params.lam == 2.0


def test_table_command(tmp_path, capsys):
    assert cli.main(["table", "--output-dir", str(tmp_path)]) == 0
    text = (tmp_path / "table.csv").read_text()
    assert capsys.readouterr().out == text
    header, first = rows(tmp_path / "table.csv")[:2]
    assert header == ["k", "chi_tilde", "chi_hat"]
    assert abs(float(first[1]) - 61.0) <= 0.05 and abs(float(first[2]) - 75.2) <= 0.05
    footer = text.strip().splitlines()[-1]
    assert footer.startswith("# chi0=61.0391") and "argmin_k=1" in footer and "loss_type=SteadyState" in footer


def test_output_is_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert cli.main(["bifurcation", "--output-dir", str(tmp_path / name), "--kmax", "4"]) == 0
    assert (tmp_path / "a" / "bifurcation.csv").read_bytes() == (tmp_path / "b" / "bifurcation.csv").read_bytes()


def test_numbers_have_ten_significant_digits():
    assert cli.fmt(1 / 3) == "0.3333333333"
    assert cli.fmt(2.0) == "2"
    assert cli.fmt(True) == "true"


def test_bifurcation_columns(tmp_path):
    assert cli.main(["bifurcation", "--output-dir", str(tmp_path), "--kmax", "2"]) == 0
    header, r1, r2 = rows(tmp_path / "bifurcation.csv")
    assert header[:8] == ["k", "chi_k", "P_k", "Q_k", "K2", "lambda_star", "K2_asymptotic_sign", "predicted_stability"]
    assert r1[7] == "Stable" and r2[7] == "Unstable"


def test_sweep_reproduces_wavemode_table(tmp_path):
    code = cli.main(["sweep", "--L", "7", "--axis", "L", "--values", "3:21:2", "--output-dir", str(tmp_path), "--workers", "2"])
    assert code == 0
    header, *body = rows(tmp_path / "sweep.csv")
    ks = [int(r[header.index("argmin_k")]) for r in body]
    assert ks == [1, 1, 2, 3, 3, 4, 4, 5, 5, 6]


def test_sweep_reproduces_oscillatory_table(tmp_path):
    args = ["sweep", "--d1", "5", "--d2", "0.1", "--lambda", "5", "--xi", "0.1", "--axis", "L", "--values", "1:14:1"]
    assert cli.main(args + ["--output-dir", str(tmp_path), "--workers", "1"]) == 0
    header, *body = rows(tmp_path / "sweep.csv")
    assert [int(r[header.index("argmin_k")]) for r in body] == [1, 1, 1, 1, 2, 2, 2, 3, 3, 3, 4, 4, 4, 5]
    assert {r[header.index("loss_type")] for r in body} == {"Hopf"}


def test_config_error_exit_status(tmp_path, capsys):
    assert cli.main(["table", "--a1", "1.5", "--output-dir", str(tmp_path)]) == 2
    record = json.loads(capsys.readouterr().err)
    assert record["error"] == "ConfigError" and record["key"] == "a1"


def test_blow_up_exit_status(tmp_path, capsys):
    cfg = write(tmp_path, {"blowup_ceiling": 2.5, "t_end": 1.0})
    code = cli.main(["simulate", "--config", str(cfg), "--output-dir", str(tmp_path / "run")])
    assert code == 3
    assert json.loads(capsys.readouterr().err)["error"] == "BlowUpError"
    assert (tmp_path / "run" / "timeseries.csv").exists()


def test_simulate_then_analyze(tmp_path):
    out = tmp_path / "run"
    assert cli.main(["simulate", "--chi", "100", "--t-end", "60", "--snapshot-every", "500", "--output-dir", str(out)]) == 0
    header, summary = rows(out / "summary.csv")
    s = dict(zip(header, summary))
    assert s["reason"] == "Steady" and s["dominant_mode"] == "1" and s["spike_count"] == "1" and s["mass_bound_ok"] == "true"
    assert rows(out / "profiles" / "profile_000000.csv")[0] == ["x", "u", "v", "w"]
    assert cli.main(["analyze", str(out), "--output-dir", str(tmp_path / "an")]) == 0
    header, analysis = rows(tmp_path / "an" / "analysis.csv")
    assert header == ["dominant_mode", "period", "spike_count", "mass_bound_ok"]
    assert analysis == [s[c] for c in header]


def test_simulate_without_equilibrium_starts_from_unit_state(tmp_path):
    out = tmp_path / "run"
    assert cli.main(["simulate", "--a1", "1.5", "--t-end", "0.1", "--output-dir", str(out)]) == 0
    first = rows(out / "profiles" / "profile_000000.csv")[1]
    assert float(first[1]) == pytest.approx(1.01, abs=1e-3)


def test_plots_are_svg(tmp_path):
    out = tmp_path / "run"
    assert cli.main(["simulate", "--t-end", "0.5", "--plots", "--output-dir", str(out)]) == 0
    assert (out / "profile.svg").read_text().lstrip().startswith("<?xml")


def test_selftest_quick(capsys):
    assert cli.main(["selftest", "--only", "1,2,3"]) == 0
    lines = [ln for ln in capsys.readouterr().out.splitlines() if ln.startswith("[")]
    assert len(lines) == 3 and all(ln.startswith("[PASS]") for ln in lines)
