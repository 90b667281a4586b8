import csv
import json
import math

import pytest

from noise_reg.cli import ConfigParse, UnknownKey, load_config, manifest_path, parse_config_text, resolve, run
from noise_reg.core import RunManifest


def _rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_verify_lambda(tmp_path, capsys):
    out = tmp_path / "v.json"
    assert run(["verify", "--claim", "lambda", "--sigma", "1", "--output", str(out)]) == 0
    rep = json.loads(out.read_text())[0]
    assert rep["passed"] and rep["checks"][0]["observed"] == 2.0 and rep["details"]["argmax"] == 2.0
    assert "[PASS] lambda" in capsys.readouterr().out
    m = RunManifest.from_json(manifest_path(out).read_text())
    assert m.command == "verify" and m.options["claim"] == "lambda"


def test_verify_global_without_noise_exits_3(tmp_path):
    out = tmp_path / "g.json"
    code = run(["verify", "--claim", "global", "--sigma", "0", "--xi-max", "200", "--grid-points", "401",
                "--output", str(out)])
    assert code == 3
    assert not json.loads(out.read_text())[0]["passed"]


def test_simulate_frozen_mode(tmp_path):
    out = tmp_path / "s.csv"
    assert run(["simulate", "--xi", "0", "--sigma", "1", "--paths", "10", "--v0", "2", "--output", str(out)]) == 0
    rows = _rows(out)
    assert [r["t"] for r in rows] == ["0.0", "0.25", "0.5", "0.75", "1.0"]
    for r in rows:
        t = float(r["t"])
        # U(t) = 1 + 2 t exactly, so |U|^2 = (1 + 2t)^2
        assert float(r["m1_hat"]) == pytest.approx((1 + 2 * t) ** 2, rel=1e-12)
        assert float(r["se1"]) == 0.0
        assert float(r["m1_exact"]) == pytest.approx((1 + 2 * t) ** 2, rel=1e-12)


def test_eigen_csv(tmp_path):
    out = tmp_path / "e.csv"
    assert run(["eigen", "--xi-min", "2", "--xi-max", "2", "--xi-points", "1", "--output", str(out)]) == 0
    (row,) = _rows(out)
    assert list(row) == ["xi", "gamma", "re_delta", "im_delta", "re_lambda_plus", "im_lambda_plus",
                         "re_lambda_minus", "im_lambda_minus"]
    assert float(row["re_lambda_plus"]) == 2.0 and float(row["re_lambda_minus"]) == -4.0


def test_moments_csv(tmp_path):
    out = tmp_path / "m.csv"
    assert run(["moments", "--n-points", "256", "--length", "32", "--t-points", "3", "--xi-max", "100",
                "--grid-points", "401", "--output", str(out)]) == 0
    rows = _rows(out)
    assert list(rows[0]) == ["t", "sobolev_s", "norm_U_sq", "norm_V_sq", "bound_rhs"]
    for r in rows:
        assert float(r["norm_U_sq"]) + float(r["norm_V_sq"]) <= float(r["bound_rhs"])


def test_demo_csv(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert run(["demo", "--sigma", "0", "--s-data", "3", "--output", str(out)]) == 0
    assert {r["verdict"] for r in _rows(out)} == {"DIVERGENT"}
    assert "verdict=DIVERGENT" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["simulate", "--sigma", "0", "--paths", "10"],
    ["simulate", "--sigma", "-1", "--paths", "10"],
    ["simulate", "--horizon", "0"],
    ["simulate", "--scheme", "leapfrog"],
    ["moments", "--n-points", "100"],
    ["frobnicate"],
    ["simulate", "--paths", "ten"],
])
def test_invalid_input_exits_2(tmp_path, argv):
    assert run(argv + ["--output", str(tmp_path / "x")] if argv[0] != "frobnicate" else argv) == 2
    assert not (tmp_path / "x").exists()


def test_blowup_exits_4(tmp_path):
    out = tmp_path / "b.csv"
    assert run(["simulate", "--u0", "1e300", "--v0", "1e300", "--paths", "4", "--output", str(out)]) == 4
    assert not out.exists() and not manifest_path(out).exists()
    assert [p.name for p in tmp_path.iterdir()] == []


def test_empty_config_is_defaults(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("")
    o = resolve("simulate", {}, cfg)
    assert o["sigma"] == 1.0 and o["horizon"] == 1.0 and o["paths"] == 10_000 and o["seed"] == 0x5EED


def test_flag_beats_config(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# comment\nsigma = 2\npaths = 1_000\n")
    assert resolve("simulate", {"sigma": "3"}, cfg)["sigma"] == 3.0
    assert resolve("simulate", {}, cfg)["sigma"] == 2.0


def test_malformed_line_reports_location():
    with pytest.raises(ConfigParse) as info:
        parse_config_text("sigma = 1\n  oops\n", "simulate")
    assert (info.value.line, info.value.column) == (2, 3)
    with pytest.raises(ConfigParse) as info:
        parse_config_text("paths = many\n", "simulate")
    assert info.value.line == 1 and info.value.column == 9


def test_unknown_key_lists_valid_keys():
    with pytest.raises(UnknownKey) as info:
        parse_config_text("sigmaa = 1\n", "simulate")
    assert "sigma" in info.value.valid and "paths" in info.value.valid


def test_config_errors_exit_2(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("bogus = 1\n")
    assert run(["eigen", "--config", str(cfg), "--output", str(tmp_path / "e.csv")]) == 2


def test_manifest_round_trip(tmp_path):
    out = tmp_path / "e.csv"
    run(["eigen", "--sigma", "0.5", "--output", str(out)])
    text = manifest_path(out).read_text()
    m = RunManifest.from_json(text)
    assert RunManifest.from_json(m.to_json()) == m
    assert m.params.sigma == 0.5 and m.schema_version == 1 and m.build and m.timestamp


def test_replay_is_bitwise_across_workers(tmp_path):
    first = tmp_path / "run.csv"
    assert run(["simulate", "--paths", str(3 * 4096 + 1), "--seed", "12345", "--xi", "1.5",
                "--scheme", "heun_stratonovich", "--workers", "1", "--output", str(first)]) == 0
    ref = first.read_bytes()
    for w in (1, 4, 16):
        out = tmp_path / f"replay{w}.csv"
        assert run(["simulate", "--config", str(manifest_path(first)), "--workers", str(w), "--output", str(out)]) == 0
        assert out.read_bytes() == ref


def test_replay_rejects_other_command(tmp_path):
    out = tmp_path / "e.csv"
    run(["eigen", "--output", str(out)])
    assert run(["simulate", "--config", str(manifest_path(out)), "--output", str(tmp_path / "s.csv")]) == 2


def test_workers_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("NOISE_REG_WORKERS", "3")
    out = tmp_path / "e.csv"
    run(["eigen", "--output", str(out)])
    assert RunManifest.from_json(manifest_path(out).read_text()).options["workers"] == 3
    monkeypatch.setenv("NOISE_REG_WORKERS", "zero")
    assert run(["eigen", "--output", str(out)]) == 2


def test_module_entry_point():
    import subprocess
    import sys

    r = subprocess.run([sys.executable, "-m", "noise_reg", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "simulate" in r.stdout
