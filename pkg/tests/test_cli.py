"""Command-line driver: config handling, artifacts, determinism, exits."""

import csv
import hashlib
import json

import numpy as np
import pytest

from heatwave.cli import build_config, main, read_config_file


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_spectrum_neumann_values(tmp_path):
    out = tmp_path / "run"
    rc = main(["spectrum", "--alpha", "0", "-n", "4", "--output", str(out)])
    assert rc == 0
    header, rows = _read_csv(out / "spectrum.csv")
    assert header == ["j", "lambda", "sqrt_lambda", "c", "trace0", "trace1"]
    lam = np.array([float(r[1]) for r in rows])
    ref = np.array([0.0, np.pi**2, 4 * np.pi**2, 9 * np.pi**2])
    assert np.max(np.abs(lam - ref)) < 1e-12
    assert (out / "spectrum.png").exists()


def test_json_table_format(tmp_path):
    out = tmp_path / "run"
    rc = main(["spectrum", "-n", "3", "--format", "json",
               "--output", str(out)])
    assert rc == 0
    data = json.loads((out / "spectrum.json").read_text())
    assert len(data) == 3
    assert not (out / "spectrum.csv").exists()


def test_manifest_lists_every_artifact_with_checksum(tmp_path):
    out = tmp_path / "run"
    assert main(["spectrum", "-n", "5", "--output", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    emitted = {p.name for p in out.iterdir()} - {"manifest.json"}
    listed = {entry["name"] for entry in manifest["files"]}
    assert listed == emitted
    for entry in manifest["files"]:
        digest = hashlib.sha256((out / entry["name"]).read_bytes()).hexdigest()
        assert entry["sha256"] == digest
        assert entry["bytes"] == (out / entry["name"]).stat().st_size
    assert manifest["config"]["alpha"] == 0.5
    assert manifest["config"]["seed"] == 1234
    assert "numpy" in manifest["versions"]
    assert manifest["wall_time_s"] >= 0.0


def test_identical_config_gives_identical_tables(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert main(["control", "--output", str(out)]) == 0
    for name in ("control.csv", "control_signal.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("# comment line\nalpha = 0.25\nn = 5\n")
    out = tmp_path / "run"
    rc = main(["spectrum", "--config", str(cfg), "-n", "3",
               "--output", str(out)])
    assert rc == 0
    _, rows = _read_csv(out / "spectrum.csv")
    assert len(rows) == 3  # flag wins over file
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["alpha"] == 0.25  # file wins over default


def test_unknown_config_key_rejected(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("alpha = 0.5\nbogus = 1\n")
    rc = main(["spectrum", "--config", str(cfg),
               "--output", str(tmp_path / "run")])
    assert rc == 2


def test_missing_config_file_is_a_usage_error(tmp_path):
    rc = main(["spectrum", "--config", str(tmp_path / "absent.cfg"),
               "--output", str(tmp_path / "run")])
    assert rc == 2


def test_invalid_values_rejected(tmp_path):
    assert main(["spectrum", "--n-heat", "0",
                 "--output", str(tmp_path / "a")]) == 2
    assert main(["simulate", "--t", "0",
                 "--output", str(tmp_path / "b")]) == 2


def test_read_config_file_parsing(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("alpha=1.0\n\n# full-line comment\nK_wave = 8\n")
    values = read_config_file(str(cfg))
    assert values == {"alpha": 1.0, "K_wave": 8}
    merged = build_config("spectrum", values, {"alpha": 2.0})
    assert merged.alpha == 2.0
    assert merged.K_wave == 8


def test_verify_suite_passes(tmp_path):
    assert main(["verify", "--output", str(tmp_path / "v")]) == 0
    header, rows = _read_csv(tmp_path / "v" / "verify.csv")
    assert header[0] == "check"
    assert len(rows) >= 15


def test_single_mode_feedback_report(tmp_path):
    out = tmp_path / "run"
    rc = main(["sylvester", "--alpha", "0.05", "-k", "200",
               "--output", str(out)])
    assert rc == 0
    manifest = json.loads((out / "manifest.json").read_text())
    scalars = manifest["key_scalars"]
    assert "abs_b_mu" in scalars
    assert "reference_sqrt2_alpha2_over_72" in scalars
    ref = np.sqrt(2.0) * 0.05**2 / 72.0
    assert abs(scalars["reference_sqrt2_alpha2_over_72"] - ref) < 1e-15
