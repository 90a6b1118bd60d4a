import json
import subprocess
from dataclasses import replace

import pytest

from conftest import tiny_config
from iit import save_config
from iit.cli import main
from iit.states import tensor_from_json


def test_run_writes_report_and_summary(tiny_path, tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["run", "--config", tiny_path, "--out", str(out), "--no-plots"])
    assert rc == 0
    stdout = capsys.readouterr().out
    assert "== run summary ==" in stdout
    assert "decision" in stdout
    doc = json.loads((out / "report.json").read_text())
    assert doc["schema_version"] == 1
    assert doc["report"]["decision"]["decision_detected"] is True


def test_run_renders_the_overview_figure(tiny_path, tmp_path):
    out = tmp_path / "out"
    rc = main(["run", "--config", tiny_path, "--out", str(out)])
    assert rc == 0
    assert (out / "run_overview.png").read_bytes()[:4] == b"\x89PNG"


def test_run_dump_state_round_trips(tiny_path, tmp_path):
    out = tmp_path / "out"
    rc = main(
        ["run", "--config", tiny_path, "--out", str(out), "--no-plots", "--dump-state"]
    )
    assert rc == 0
    doc = json.loads((out / "final_state.json").read_text())
    state = tensor_from_json(doc["state"])
    assert state.amplitudes.ndim == 3


def test_profile_env_variable_is_honored(tiny_path, tmp_path, monkeypatch):
    monkeypatch.setenv("IIT_PROFILE", "full")
    out = tmp_path / "out"
    assert main(["run", "--config", tiny_path, "--out", str(out), "--no-plots"]) == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["report"]["profile"] == "full"
    assert doc["manifest"]["profile"] == "full"


def test_profile_flag_overrides_env(tiny_path, tmp_path, monkeypatch):
    monkeypatch.setenv("IIT_PROFILE", "full")
    out = tmp_path / "out"
    rc = main(
        [
            "run", "--config", tiny_path, "--out", str(out), "--no-plots",
            "--profile", "compact",
        ]
    )
    assert rc == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["report"]["profile"] == "compact"


def test_sweep_writes_csv(tiny_path, tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(
        [
            "sweep", "--config", tiny_path, "--param", "g23",
            "--values", "1.0,2.0", "--out", str(out), "--no-plots",
        ]
    )
    assert rc == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0].startswith("param,gamma2,gamma3_effective")
    assert len(lines) == 3
    assert "sweep over g23" in capsys.readouterr().out


def test_invert_prints_the_worked_instance(capsys):
    rc = main(
        [
            "invert", "--delta", "0.05", "--a", "0.7071067811865476",
            "--b", "0.7071067811865476", "--gamma2", "0.5", "--alpha", "0.5",
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert out.startswith("gamma3 = 0.8")


def test_invert_to_G_closed_form(capsys):
    rc = main(
        [
            "invert", "--delta", "0.05", "--a", "0.7071067811865476",
            "--b", "0.7071067811865476", "--gamma2", "0.5", "--alpha", "0.5",
            "--to-G", "--sigma2", "1.0", "--beta2", "1.0",
            "--m-plus", "-2.0", "--m-minus", "2.0",
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "G = " in out and "closed_form mode" in out


def test_exit_code_3_for_dead_channel(capsys):
    rc = main(
        [
            "invert", "--delta", "0.05", "--a", "0.7071067811865476",
            "--b", "0.7071067811865476", "--gamma2", "0", "--alpha", "0.5",
        ]
    )
    assert rc == 3
    assert "error:" in capsys.readouterr().err


def test_exit_code_3_for_unreachable_target(capsys):
    # gamma3 comes out near 1 but the scenario floor is far below it; a target
    # above the G=0 value is unreachable
    rc = main(
        [
            "invert", "--delta", "-0.1", "--a", "0.7071067811865476",
            "--b", "0.7071067811865476", "--gamma2", "0.5", "--alpha", "0.5",
            "--to-G", "--sigma2", "1.0", "--beta2", "1.0",
            "--m-plus", "-2.0", "--m-minus", "2.0",
        ]
    )
    assert rc == 3


def test_exit_code_1_for_missing_config(capsys):
    assert main(["run", "--config", "/nope/missing.json", "--no-plots"]) == 1
    assert "error:" in capsys.readouterr().err


def test_exit_code_1_for_bad_sweep_param(tiny_path, tmp_path):
    rc = main(
        [
            "sweep", "--config", tiny_path, "--param", "bogus",
            "--values", "1.0", "--out", str(tmp_path), "--no-plots",
        ]
    )
    assert rc == 1


def test_exit_code_1_for_unparseable_values(tiny_path, tmp_path):
    rc = main(
        [
            "sweep", "--config", tiny_path, "--param", "g23",
            "--values", "1.0,zap", "--out", str(tmp_path), "--no-plots",
        ]
    )
    assert rc == 1


def test_exit_code_1_for_unknown_profile(tiny_path, tmp_path):
    rc = main(
        [
            "run", "--config", tiny_path, "--out", str(tmp_path),
            "--no-plots", "--profile", "huge",
        ]
    )
    assert rc == 1


def test_exit_code_1_for_incomplete_to_G():
    rc = main(
        [
            "invert", "--delta", "0.05", "--a", "0.7071067811865476",
            "--b", "0.7071067811865476", "--gamma2", "0.5", "--alpha", "0.5",
            "--to-G", "--sigma2", "1.0",
        ]
    )
    assert rc == 1


def test_exit_code_2_for_gating_violation(tmp_path, capsys):
    cfg = tiny_config()
    cfg = replace(cfg, schedule=replace(cfg.schedule, vr_active_during_vn23=False))
    path = tmp_path / "gated.json"
    save_config(cfg, str(path))
    rc = main(["run", "--config", str(path), "--out", str(tmp_path), "--no-plots"])
    assert rc == 2
    assert "vr_gating" in capsys.readouterr().err


def test_exit_code_1_for_nonlocality_without_the_switch(tmp_path):
    cfg = tiny_config(alice_switch=False)
    path = tmp_path / "off.json"
    save_config(cfg, str(path))
    rc = main(
        [
            "nonlocality", "--config", str(path), "--betas", "0.5,1.0",
            "--out", str(tmp_path), "--no-plots",
        ]
    )
    assert rc == 1


def test_nonlocality_writes_csv(tiny_path, tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(
        [
            "nonlocality", "--config", tiny_path, "--betas", "0.25,1.0",
            "--out", str(out), "--no-plots",
        ]
    )
    assert rc == 0
    lines = (out / "nonlocality.csv").read_text().splitlines()
    assert lines[0] == "beta2,gamma3,bob_expectation,alice_marginal_tv"
    assert len(lines) == 3
    assert "max pairwise TV" in capsys.readouterr().out


def test_usage_errors_exit_1():
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 1
    with pytest.raises(SystemExit) as err:
        main([])
    assert err.value.code == 1


def test_verify_runs_the_battery(capsys):
    rc = main(["verify", "--profile", "compact"])
    out = capsys.readouterr().out
    assert rc == 0
    assert out.count("criterion") == 9
    assert "9/9 criteria passed" in out


def test_console_script_entry_point():
    proc = subprocess.run(
        [
            "iit", "invert", "--delta", "0.05", "--a", "0.7071067811865476",
            "--b", "0.7071067811865476", "--gamma2", "0.5", "--alpha", "0.5",
        ],
        capture_output=True,
        text=True,
        timeout=60,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("gamma3 = 0.8")
