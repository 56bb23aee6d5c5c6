"""Tests of the command-line runner: configs, artifacts, exit codes."""

import yaml

import pytest

from rpqds.cli import (
    MC_CSV_HEADER,
    SCAN_CSV_HEADER,
    ConfigError,
    build_scenario,
    load_config,
    main,
)


def run_cli(argv):
    return main(argv)


def test_mc_verify_smoke(tmp_path):
    out = tmp_path / "mc.csv"
    code = run_cli(["mc-verify", "--trials", "100000", "--seed", "9",
                    "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(MC_CSV_HEADER)
    # five quantities per default setting, four settings
    assert len(lines) == 1 + 5 * 4
    assert out.with_suffix(".manifest.yaml").exists()
    assert out.with_suffix(".png").exists()


def test_scan_writes_schema_and_manifest(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(yaml.safe_dump({
        "e_d_values": [0.05],
        "distances": [100.0],
        "budget": 200,
        "include_baseline": True,
        "out": str(tmp_path / "scan.csv"),
    }))
    code = run_cli(["asym-scan", "--config", str(cfg), "--seed", "1"])
    assert code == 0
    lines = (tmp_path / "scan.csv").read_text().splitlines()
    assert lines[0] == ",".join(SCAN_CSV_HEADER)
    assert len(lines) == 2
    fields = lines[1].split(",")
    assert fields[-1] == "1"
    assert float(fields[2]) > 0.0
    assert float(fields[4]) > 0.0  # improvement column filled
    assert (tmp_path / "scan.png").exists()
    assert (tmp_path / "scan.gamma.png").exists()


def test_manifest_reproduces_byte_identical_csv(tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    code = run_cli(["mc-verify", "--trials", "200000", "--seed", "5",
                    "--out", str(out1)])
    assert code == 0
    manifest = out1.with_suffix(".manifest.yaml")
    code = run_cli(["mc-verify", "--config", str(manifest),
                    "--out", str(out2)])
    assert code == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_unknown_config_key_is_an_error(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("distancez: [1, 2]\n")
    assert run_cli(["asym-scan", "--config", str(cfg)]) == 2


def test_unknown_system_key_is_an_error(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(yaml.safe_dump({"system": {"alpha": 0.2, "pd": 1e-11}}))
    assert run_cli(["asym-scan", "--config", str(cfg)]) == 2


def test_missing_config_file_is_an_error(tmp_path):
    assert run_cli(["asym-scan", "--config",
                    str(tmp_path / "nope.yaml")]) == 2


def test_infeasible_everywhere_exit_code(tmp_path, capsys):
    out = tmp_path / "inf.csv"
    code = run_cli(["optimize", "--mode", "scf-asym", "--distance", "900",
                    "--e-d", "0.3", "--budget", "50", "--out", str(out)])
    assert code == 3
    err = capsys.readouterr().err
    assert "infeasible-everywhere" in err
    # artifacts still written, point marked infeasible
    lines = out.read_text().splitlines()
    assert lines[1].split(",")[-1] == "0"


def test_no_rp_flag_drops_pairing(tmp_path):
    out_rp = tmp_path / "rp.csv"
    out_no = tmp_path / "no.csv"
    for path, flag in ((out_rp, "--rp"), (out_no, "--no-rp")):
        code = run_cli(["optimize", "--mode", "sns-asym", "--distance",
                        "100", "--e-d", "0.1", "--budget", "250",
                        "--seed", "2", flag, "--out", str(path)])
        assert code == 0
    rate_rp = float(out_rp.read_text().splitlines()[1].split(",")[2])
    rate_no = float(out_no.read_text().splitlines()[1].split(",")[2])
    assert rate_rp > rate_no


def test_search_override_narrows_axis(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(yaml.safe_dump({
        "e_d_values": [0.05],
        "distances": [100.0],
        "budget": 150,
        "search": {"mu": {"lo": 0.2, "hi": 0.25}},
        "out": str(tmp_path / "s.csv"),
    }))
    assert run_cli(["asym-scan", "--config", str(cfg)]) == 0
    mu = float((tmp_path / "s.csv").read_text()
               .splitlines()[1].split(",")[11])
    assert 0.2 <= mu <= 0.25


def test_bad_search_axis_rejected():
    with pytest.raises(ConfigError):
        build_scenario({"mode": "sns-asym", "search": {"nope": {}},
                        "distances": [1.0]})


def test_load_config_unwraps_manifest(tmp_path):
    path = tmp_path / "m.yaml"
    path.write_text(yaml.safe_dump({
        "command": "asym-scan",
        "version": "0.1.0",
        "config": {"mode": "sns-asym", "distances": [10.0]},
    }))
    data = load_config(path)
    assert data["mode"] == "sns-asym"


def test_reproduce_rejects_unknown_preset():
    with pytest.raises(SystemExit):
        run_cli(["reproduce", "fig99"])


def test_reproduce_preset_artifacts(tmp_path):
    out = tmp_path / "f12.csv"
    code = run_cli(["reproduce", "fig12-sns", "--budget", "60",
                    "--out", str(out), "--seed", "0"])
    assert code in (0, 3)  # tiny budget may leave points infeasible
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(SCAN_CSV_HEADER)
    assert len(lines) == 1 + 13  # 50..350 step 25
    manifest = yaml.safe_load(
        out.with_suffix(".manifest.yaml").read_text())
    assert manifest["command"] == "reproduce"
    assert "BB84" in manifest["config"]["note"]