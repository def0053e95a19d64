import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from bibc.harness.cli import main
from bibc.harness.config import ConfigError, ScenarioConfig, config_from_dict, dump_config, load_config
from bibc.harness.csvio import CsvWriteError, Table, emit_csv, format_value
from bibc.harness.runner import run_scenario


def write(tmp_path, text, name="cfg.json"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_empty_file_gives_defaults(tmp_path):
    cfg = load_config(write(tmp_path, ""))
    assert (cfg.M, cfg.N, cfg.wavelength, cfg.d_ant) == (16, 16, 0.1, 0.5)
    assert (cfg.J_p, cfg.tau_p, cfg.J_d, cfg.tau_d) == (1, 16, 2, 16)
    assert cfg == ScenarioConfig()


@pytest.mark.parametrize(
    "data, key",
    [
        ({"tau_d": 8}, "tau_d"),
        ({"tau_p": 8}, "tau_p"),
        ({"K": 16}, "K"),
        ({"M": 0}, "M"),
        ({"projection_mode": "x"}, "projection_mode"),
        ({"bogus": 1}, "bogus"),
        ({"M": 2.5}, "M"),
        ({"reflector_y": 1.0}, "reflector_y"),
        ({"bd_position": [1]}, "bd_position"),
    ],
)
def test_constraint_violations_name_the_key(data, key):
    with pytest.raises(ConfigError) as err:
        config_from_dict(data)
    assert err.value.key == key


def test_tau_d_error_mentions_bound():
    with pytest.raises(ConfigError, match="tau_d >= M"):
        config_from_dict({"tau_d": 8})


def test_invalid_json(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, "{nope"))


def test_config_echo_round_trip(tmp_path):
    cfg = config_from_dict({"K": 2, "bd_y_sweep": [1, 2], "seed": 5, "normalize_backscatter": True})
    p = write(tmp_path, dump_config(cfg))
    assert load_config(p) == cfg
    assert dump_config(load_config(p)) == dump_config(cfg)


def test_format_value():
    assert format_value(1 / 3) == "0.333333333333"
    assert format_value(np.int64(7)) == "7"
    assert format_value(-np.inf) == "-inf"
    assert format_value("lbl") == "lbl"
    assert format_value(0.0) == "0"


def test_emit_csv_format(tmp_path):
    t = Table(("a", "b"))
    t.add(1.0 / 7, "x,y")
    path = emit_csv(t, tmp_path / "o.csv")
    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.decode("utf-8") == 'a,b\n0.142857142857,"x,y"\n'
    with pytest.raises(ValueError):
        t.add(1)


def test_emit_csv_reports_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(CsvWriteError, match="file"):
        emit_csv(Table(("a",)), blocker / "x.csv")


def test_fig4_labels_and_columns(tmp_path):
    art = run_scenario(ScenarioConfig(), "fig4", tmp_path)
    rows = read_csv(art.path("radiation.csv"))
    assert list(rows[0]) == ["theta_deg", "e_t_db", "label"]
    labels = list(dict.fromkeys(r["label"] for r in rows))
    assert len(labels) == 5 and labels[0].endswith("none")
    flat = {float(r["e_t_db"]) for r in rows if r["label"] == labels[0]}
    assert len(flat) == 1


def test_fig3_has_three_projected_and_unprojected_curves(tmp_path):
    art = run_scenario(ScenarioConfig(), "fig3", tmp_path)
    labels = set(r["label"] for r in read_csv(art.path("radiation.csv")))
    assert {"M=8 N=16 K=2", "M=16 N=16 K=3", "M=16 N=8 K=2"} <= labels
    assert any(lbl.endswith("none") for lbl in labels)


def test_fig5_row_at_y10(tmp_path):
    cfg = ScenarioConfig(bd_y_sweep=(5.0, 10.0))
    art = run_scenario(cfg, "fig5", tmp_path, trials=50)
    rows = read_csv(art.path("dynamic_range.csv"))
    assert list(rows[0]) == ["y_m", "mode", "k", "snr_p_db", "zeta_db", "trials"]
    none = [r for r in rows if r["mode"] == "none" and float(r["y_m"]) == 10.0]
    assert float(none[0]["zeta_db"]) == pytest.approx(28.32, abs=0.1)
    modes = {(r["mode"], r["k"], r["snr_p_db"]) for r in rows}
    assert ("estimated", "3", "5") in modes and ("estimated", "3", "20") in modes
    assert {("perfect", str(k), "20") for k in range(1, 5)} <= modes


def test_fig6_outputs_and_thread_determinism(tmp_path):
    a = run_scenario(ScenarioConfig(), "fig6", tmp_path / "a", seed=2, trials=40, threads=1)
    b = run_scenario(ScenarioConfig(), "fig6", tmp_path / "b", seed=2, trials=40, threads=3)
    for name in a.files + ("config.json", "run.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rows = read_csv(a.path("roc.csv"))
    assert list(rows[0]) == ["mode", "snr_p_db", "threshold_log", "p_fa", "p_d", "trials"]
    assert {r["mode"] for r in rows} == {"perfect", "estimated", "none"}
    stats = read_csv(a.path("roc_statistics.csv"))
    assert len(stats) == 6 * 2 * 40
    meta = json.loads(a.path("run.json").read_text())
    assert meta["seed"] == 2 and meta["run_id"] == a.run_id


def test_seed_changes_output(tmp_path):
    run_scenario(ScenarioConfig(), "fig6", tmp_path / "a", seed=1, trials=20)
    run_scenario(ScenarioConfig(), "fig6", tmp_path / "b", seed=2, trials=20)
    assert (tmp_path / "a" / "roc.csv").read_bytes() != (tmp_path / "b" / "roc.csv").read_bytes()


def test_echo_reproduces_run(tmp_path):
    a = run_scenario(config_from_dict({"projection_mode": "perfect"}), "custom", tmp_path / "a", seed=3, trials=30)
    cfg = load_config(a.path("config.json"))
    b = run_scenario(cfg, "custom", tmp_path / "b")
    for name in a.files:
        assert a.path(name).read_bytes() == b.path(name).read_bytes()
    assert a.run_id == b.run_id


def test_custom_p2only(tmp_path):
    cfg = config_from_dict({"detector_mode": "p2only", "projection_mode": "none", "K": 0})
    art = run_scenario(cfg, "custom", tmp_path, trials=20)
    assert "roc.csv" in art.files


def test_unknown_preset(tmp_path):
    with pytest.raises(ValueError):
        run_scenario(ScenarioConfig(), "fig9", tmp_path)


def test_cli_exit_codes(tmp_path, capsys):
    good = write(tmp_path, "{}")
    bad = write(tmp_path, '{"K": 16}', "bad.json")
    assert main(["validate", "--config", str(good)]) == 0
    assert json.loads(capsys.readouterr().out)["M"] == 16
    assert main(["validate", "--config", str(bad)]) == 2
    assert main(["run", "--config", str(bad), "--scenario", "fig4", "--out", str(tmp_path / "o")]) == 2
    assert main(["run", "--config", str(good), "--scenario", "fig4", "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "radiation.csv").exists()
    # runtime failure: output path is a regular file
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert main(["run", "--config", str(good), "--scenario", "fig4", "--out", str(blocker)]) == 1


def test_cli_env_output_dir(tmp_path, monkeypatch):
    cfg = write(tmp_path, "")
    monkeypatch.setenv("BIBC_SIM_OUT", str(tmp_path / "envout"))
    assert main(["run", "--config", str(cfg), "--scenario", "fig4"]) == 0
    assert (tmp_path / "envout" / "radiation.csv").exists()


def test_console_script_runs(tmp_path):
    cfg = write(tmp_path, "")
    proc = subprocess.run(
        [sys.executable, "-m", "bibc.harness.cli", "validate", "--config", str(cfg)],
        capture_output=True,
        text=True,
        env=dict(os.environ),
    )
    assert proc.returncode == 0 and '"M": 16' in proc.stdout
