import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from betashrink.cli import grid_points, main
from betashrink.errors import ParseError, ShapeError
from betashrink.files import RunManifest, dyadic_prefix, parse_risk_csv, parse_samples
from betashrink.signals import add_noise, dj_signal
from betashrink.study import AmseTable


def _write_samples(path, values, header="value"):
    lines = ([header] if header else []) + [repr(float(v)) for v in values]
    path.write_text("\n".join(lines) + "\n")


def _read_column(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([float(r[0]) for r in rows[1:]])


def test_parse_samples_header_and_errors():
    np.testing.assert_array_equal(parse_samples("x\n1\n2\n\n3.5\n"), [1.0, 2.0, 3.5])
    np.testing.assert_array_equal(parse_samples("1\n2\n"), [1.0, 2.0])
    with pytest.raises(ParseError) as info:
        parse_samples("h\n1\n2\nfoo\n")
    assert info.value.line == 4
    with pytest.raises(ParseError):
        parse_samples("1,2\n3,4\n")
    with pytest.raises(ParseError):
        parse_samples("1\nnan\n")
    with pytest.raises(ShapeError):
        parse_samples("header\n1\n")


def test_dyadic_prefix():
    assert dyadic_prefix(np.arange(20000.0)).size == 16384
    assert dyadic_prefix(np.arange(1024.0)).size == 1024
    with pytest.raises(ShapeError):
        dyadic_prefix(np.arange(20.0), truncate=False)


def test_grid_points():
    np.testing.assert_allclose(grid_points("-1:1:0.5"), [-1, -0.5, 0, 0.5, 1])
    np.testing.assert_array_equal(grid_points("0"), [0.0])
    for bad in ("1:0:0.1", "0:1:0", "a:b:c", "0:1"):
        with pytest.raises(Exception):
            grid_points(bad)


def test_denoise_zero_input(tmp_path):
    _write_samples(tmp_path / "z.txt", np.zeros(1024))
    assert main(["denoise", "--input", str(tmp_path / "z.txt"), "--out", str(tmp_path / "o")]) == 0
    header, vals = _read_column(tmp_path / "o" / "denoised.csv")
    assert header == ["denoised"] and vals.size == 1024 and np.all(vals == 0)


def test_denoise_improves_on_noisy_input_and_reruns(tmp_path):
    f = dj_signal("bumps", 1024)
    y, _ = add_noise(f, 5.0, np.random.default_rng(8))
    _write_samples(tmp_path / "y.txt", np.append(y, [0.1, 0.2, 0.3]))
    out = tmp_path / "a"
    assert main(["denoise", "--input", str(tmp_path / "y.txt"), "--rule", "beta", "--a", "2", "--out", str(out)]) == 0
    _, fhat = _read_column(out / "denoised.csv")
    assert fhat.size == 1024
    assert np.mean((fhat - f) ** 2) < np.mean((y - f) ** 2)

    with open(out / "coefficients.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["level", "k", "empirical", "shrunk"]
    assert len(rows) - 1 == 1024 - 8

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "denoise"
    assert manifest["config"]["j0"] == 3 and manifest["config"]["filter_n"] == 10
    assert manifest["results"]["samples_used"] == 1024
    assert set(manifest["outputs"]) == {"denoised.csv", "coefficients.csv"}

    again = tmp_path / "b"
    assert main(["rerun", "--manifest", str(out / "manifest.json"), "--out", str(again)]) == 0
    for name in ("denoised.csv", "coefficients.csv"):
        assert (again / name).read_bytes() == (out / name).read_bytes()


@pytest.mark.parametrize("rule", ["triangular", "bickel", "universal-soft", "universal-hard", "sure", "fdr"])
def test_denoise_every_rule(tmp_path, rule):
    y, _ = add_noise(dj_signal("doppler", 256), 5.0, np.random.default_rng(1))
    _write_samples(tmp_path / "y.txt", y, header=None)
    assert main(["denoise", "--input", str(tmp_path / "y.txt"), "--rule", rule, "--out", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "manifest.json").read_text())["results"]["rule"]


def test_denoise_exit_codes(tmp_path):
    (tmp_path / "bad.txt").write_text("1\n2\nthree\n")
    assert main(["denoise", "--input", str(tmp_path / "bad.txt"), "--out", str(tmp_path / "o")]) == 3
    assert main(["denoise", "--input", str(tmp_path / "missing.txt"), "--out", str(tmp_path / "o")]) == 3
    _write_samples(tmp_path / "odd.txt", np.arange(100.0))
    assert main(["denoise", "--input", str(tmp_path / "odd.txt"), "--no-truncate", "--out", str(tmp_path / "o")]) == 3
    _write_samples(tmp_path / "ok.txt", np.arange(64.0))
    assert main(["denoise", "--input", str(tmp_path / "ok.txt"), "--j0", "6", "--out", str(tmp_path / "o")]) == 2
    assert main(["denoise", "--input", str(tmp_path / "ok.txt"), "--filter-n", "0", "--out", str(tmp_path / "o")]) == 2
    with pytest.raises(SystemExit) as info:
        main(["denoise", "--input", "x", "--rule", "magic", "--out", "o"])
    assert info.value.code == 2


def test_simulate_smoke_and_byte_identical(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"signal": "Bumps", "n": 512, "snr": 3, "M": 2, "rules": ["universal-soft"], "seed": 1}))
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["simulate", "--config", str(cfg), "--workers", "3", "--out", str(tmp_path / "b")]) == 0
    text = (tmp_path / "a" / "amse.csv").read_text()
    assert text == (tmp_path / "b" / "amse.csv").read_text()
    table = AmseTable.from_csv(text)
    assert len(table.rows) == 1 and table.rows[0].rule == "universal-soft"
    manifest = RunManifest.load(tmp_path / "a" / "manifest.json")
    assert manifest.seed == 1 and manifest.config["study"]["policy"]["J0"] == 3
    assert main(["rerun", "--manifest", str(tmp_path / "a" / "manifest.json"), "--out", str(tmp_path / "c")]) == 0
    assert (tmp_path / "c" / "amse.csv").read_text() == text


@pytest.mark.parametrize(
    "content", ['{"signal": "Bumps", "bogus": 1}', '{"n": 500}', "not json", '["a"]', '{"rules": ["magic"]}']
)
def test_simulate_schema_errors(tmp_path, content, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(content)
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "error" in capsys.readouterr().err


def test_risk_command_output(tmp_path):
    out = tmp_path / "r"
    assert main(["risk", "--prior", "beta", "--a", "5", "--alpha", "0.9", "--m", "3",
                 "--sigma", "1", "--grid", "-3:3:0.5", "--out", str(out)]) == 0
    cols, br = parse_risk_csv((out / "risk.csv").read_text())
    assert cols["theta"].size == 13
    np.testing.assert_allclose(cols["classical_risk"], cols["bias_sq"] + cols["variance"], rtol=1e-13)
    i0 = int(np.argmin(np.abs(cols["theta"])))
    assert cols["bias_sq"][i0] == pytest.approx(0.0, abs=1e-20)
    assert br == pytest.approx(0.074, abs=0.005)


def test_risk_command_rejects_bad_hyperparameters(tmp_path):
    assert main(["risk", "--alpha", "1.2", "--out", str(tmp_path / "o")]) == 2
    assert main(["risk", "--m", "-1", "--out", str(tmp_path / "o")]) == 2
    assert main(["risk", "--grid", "2:1:0.1", "--out", str(tmp_path / "o")]) == 2


def test_rerun_rejects_bad_manifest(tmp_path):
    (tmp_path / "m.json").write_text('{"command": "explode", "config": {}}')
    assert main(["rerun", "--manifest", str(tmp_path / "m.json"), "--out", str(tmp_path / "o")]) == 2
    (tmp_path / "m2.json").write_text("{")
    assert main(["rerun", "--manifest", str(tmp_path / "m2.json"), "--out", str(tmp_path / "o")]) == 3


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"signal": "Doppler", "n": 256, "snr": 5, "M": 1, "rules": ["sure"], "seed": 0}))
    proc = subprocess.run([sys.executable, "-m", "betashrink", "simulate", "--config", str(cfg),
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "o" / "amse.csv").exists()
