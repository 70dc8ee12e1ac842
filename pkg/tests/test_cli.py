import json
import math

import pytest

from discordnet import cli


def run(argv, capsys):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_gqd_named_state(capsys):
    code, out, _ = run(
        ["gqd", "--state", "w", "--n", "3", "--inner-budget", "fast"], capsys
    )
    assert code == 0
    value = float(out.split("=")[1])
    assert abs(value - math.log2(3)) < 1e-6


def test_discord_named_state(capsys):
    code, out, _ = run(
        ["discord", "--state", "bell_mixture", "--param", "x=0.5",
         "--inner-budget", "fast"], capsys
    )
    assert code == 0
    assert out.startswith("D(")


def test_protocol_run_computational_basis_gives_zero_discord(capsys):
    # theta = 0 measures the carriers in the computational basis: no discord
    code, out, _ = run(
        ["protocol", "run", "--n", "2", "--theta", "0,1.0",
         "--inner-budget", "fast"], capsys
    )
    assert code == 0
    for line in out.splitlines():
        if line.strip().startswith(("GQD", "D(")):
            assert abs(float(line.split("=")[1])) < 1e-7


def test_protocol_run_radians_at_maximum(capsys):
    code, out, _ = run(
        ["protocol", "run", "--n", "2", "--theta", "0.9458,0.9458",
         "--report", "gqd", "--inner-budget", "fast"], capsys
    )
    assert code == 0
    gqd_line = [l for l in out.splitlines() if "GQD" in l][0]
    assert abs(float(gqd_line.split("=")[1]) - 0.2198113593729) < 1e-6


def test_global_flags_accepted_after_subcommand(capsys):
    code, _, _ = run(
        ["gqd", "--state", "ghz3", "--inner-budget", "fast",
         "--seed", "3"], capsys
    )
    assert code == 0


def test_bad_flag_exits_1(capsys):
    code, _, err = run(["gqd", "--state", "w", "--n", "3", "--bogus"], capsys)
    assert code == 1
    assert "error" in err


def test_unknown_state_exits_1(capsys):
    code, _, err = run(["gqd", "--state", "no_such_family"], capsys)
    assert code == 1
    assert "error" in err


def test_theta_count_mismatch_exits_1(capsys):
    code, _, _ = run(["protocol", "run", "--n", "3", "--theta", "0.9,0.9"], capsys)
    assert code == 1


def test_config_file_sets_defaults_and_flags_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# experiment defaults\n"
        "state = w\n"
        "n = 3\n"
        "inner-budget = fast\n",
        encoding="utf-8",
    )
    code, out, _ = run(["--config", str(cfg), "gqd"], capsys)
    assert code == 0
    assert abs(float(out.split("=")[1]) - math.log2(3)) < 1e-6
    # explicit flag overrides the file value
    code, out, _ = run(["--config", str(cfg), "gqd", "--n", "2"], capsys)
    assert code == 0
    assert abs(float(out.split("=")[1]) - 1.0) < 1e-6


def test_config_file_unknown_key_exits_1(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("volume = 11\n", encoding="utf-8")
    code, _, err = run(["--config", str(cfg), "gqd", "--state", "w"], capsys)
    assert code == 1
    assert "unknown config keys" in err


def test_missing_config_file_exits_1(capsys):
    code, _, _ = run(["--config", "/nonexistent.cfg", "gqd", "--state", "w"], capsys)
    assert code == 1


def test_emit_outputs_with_manifest(tmp_path, capsys):
    code, out, _ = run(
        ["heatmap", "--resolution", "3", "--out", str(tmp_path),
         "--format", "json", "--inner-budget", "fast"], capsys
    )
    assert code == 0
    data = tmp_path / "heatmap.json"
    manifest = tmp_path / "heatmap_manifest.json"
    assert data.exists() and manifest.exists()
    records = json.loads(data.read_text(encoding="utf-8"))
    assert len(records) == 9
    assert set(records[0]) == {"theta1", "theta2", "d_m1_m2", "d_m2_m1", "gqd"}
    payload = json.loads(manifest.read_text(encoding="utf-8"))
    assert "heatmap.json" in payload["files"]


def test_reruns_byte_identical(tmp_path, capsys):
    d1, d2 = tmp_path / "a", tmp_path / "b"
    for d in (d1, d2):
        code, _, _ = run(
            ["heatmap", "--resolution", "3", "--out", str(d),
             "--format", "csv", "--seed", "5"], capsys
        )
        assert code == 0
    assert (d1 / "heatmap.csv").read_bytes() == (d2 / "heatmap.csv").read_bytes()


def test_threads_env_fallback(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("DISCORDNET_THREADS", "2")
    code, _, _ = run(
        ["heatmap", "--resolution", "3", "--out", str(tmp_path)], capsys
    )
    assert code == 0
