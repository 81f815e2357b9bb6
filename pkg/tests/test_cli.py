import json

import pytest

from bzl.cli import main


def write(tmp_path, text):
    p = tmp_path / "c.toml"
    p.write_text(text)
    return str(p)


def files(d):
    return sorted(p.name for p in d.iterdir())


def test_clt_run_default_config(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["clt-run"]) == 0
    out = tmp_path / "bzl-out"
    assert {"summary.json", "samples.csv", "manifest.json"} <= set(files(out))
    summary = json.loads((out / "summary.json").read_text())
    assert summary["trials"] == 2000 and summary["n"] == 50
    assert summary["max_dual_route_error"] < 1e-3
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 20261016
    assert set(manifest["versions"]) == {"bzl", "python", "numpy", "scipy"}
    assert manifest["wall_time_s"] > 0


def test_trials_zero_is_config_error(tmp_path, capsys):
    assert main(["clt-run", "--config", write(tmp_path, "trials = 0\n")]) == 1
    assert "trials" in capsys.readouterr().err


def test_samples_byte_identical_and_manifest_round_trip(tmp_path, monkeypatch):
    cfg = write(tmp_path, "n = [15]\ntrials = 150\n")
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert main(["clt-run", "--config", cfg, "--seed", "9", "--out", str(a)]) == 0
    monkeypatch.setenv("BZL_THREADS", "3")
    assert main(["clt-run", "--config", cfg, "--seed", "9", "--out", str(b)]) == 0
    monkeypatch.delenv("BZL_THREADS")
    assert main(["clt-run", "--config", str(a / "manifest.json"), "--out", str(c)]) == 0
    for name in ("samples.csv", "trials.csv", "summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes() == (c / name).read_bytes()
    raw = (a / "samples.csv").read_bytes()
    assert b"\r" not in raw and raw.startswith(b"trial,standardized\n")
    assert json.loads((a / "manifest.json").read_text())["resolved_config"]["seed"] == 9


def test_other_experiments(tmp_path):
    cfg = write(tmp_path, "n = [20, 40]\n")
    expected = {
        "kernel-diagnostics": {"kernel.csv", "density.json"},
        "decay-fit": {"decay.csv"},
        "equilibrium": {"equilibrium.json", "profile.csv"},
        "conditions": {"conditions.json"},
        "hypothesis-check": {"hypothesis.json"},
    }
    for exp, names in expected.items():
        out = tmp_path / exp
        assert main([exp, "--config", cfg, "--out", str(out), "--strict"]) == 0
        assert names | {"manifest.json"} == set(files(out))
    header = (tmp_path / "kernel-diagnostics" / "kernel.csv").read_text().splitlines()[0]
    assert header == "n,z_re,z_im,B_n,tyz_ratio"
    header = (tmp_path / "decay-fit" / "decay.csv").read_text().splitlines()[0]
    assert header == "n,r,abs_rho,fit_T,fit_C,r2"
    eq = json.loads((tmp_path / "equilibrium" / "equilibrium.json").read_text())
    assert eq["20"]["outer_radius"] == pytest.approx(1.0)


def test_hypothesis_check_strict_exit_codes(tmp_path):
    cfg = write(tmp_path, 'n = [25, 50, 100, 200]\n[weight]\nfamily = "gaussian_sine"\n')
    assert main(["hypothesis-check", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["hypothesis-check", "--config", cfg, "--out", str(tmp_path / "b"), "--strict"]) == 2
    rep = json.loads((tmp_path / "b" / "hypothesis.json").read_text())
    assert rep["all_ok"] is False and rep["c3_ok"] is False


def test_module_error_exit_one(tmp_path, capsys):
    cfg = write(tmp_path, "n = [20]\ntrials = 100\n[test_function]\nradius = 1.5\n")
    assert main(["clt-run", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
    assert "SupportOutsideBulk" in capsys.readouterr().err
