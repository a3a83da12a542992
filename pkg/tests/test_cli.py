import json
import subprocess
import sys

import numpy as np
import pytest

from bigjump import cli


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_table(path):
    lines = open(path).read().splitlines()
    header = json.loads(lines[0][2:])
    rows = np.array([[float(v) for v in line.split(",")] for line in lines[2:]])
    return header, lines[1], rows


def test_list_models_text(capsys):
    code, out, _ = run_cli(capsys, "list-models")
    assert code == 0
    for name in ("gamma", "weibull", "lognormal", "pareto", "expsqrt", "exp"):
        assert name in out


def test_list_models_json(capsys):
    code, out, _ = run_cli(capsys, "list-models", "--format", "json")
    rows = json.loads(out)
    assert code == 0 and {r["name"] for r in rows} >= {"gamma", "expsqrt:+", "exp"}
    assert all({"params", "support", "defaults"} <= set(r) for r in rows)


def test_unknown_flag_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "list-models", "--bogus")
    assert code == 2 and "unrecognized" in err


@pytest.mark.parametrize("argv", [
    ["density", "--model", "gamma:a=-1", "--d", "3"],
    ["density", "--model", "nosuch", "--d", "3"],
    ["density", "--model", "exp"],
    ["ladder", "--model", "exp", "--d-ladder", "10,x"],
    [],
])
def test_parse_errors_exit_2(capsys, argv):
    assert run_cli(capsys, *argv)[0] == 2


def test_density_gamma_matches_beta(capsys, tmp_path):
    out = tmp_path / "g.csv"
    code, _, _ = run_cli(capsys, "density", "--model", "gamma:a=2", "--d", "100",
                         "--grid-n", "128", "--out", str(out))
    assert code == 0
    header, cols, rows = read_table(out)
    assert cols == "x,log_pdf,pdf" and header["d"] == 100.0 and header["family"] == "gamma"
    x, pdf = rows[:, 0], rows[:, 2]
    assert np.max(np.abs(pdf - 6 * x * (1 - x))) < 1e-6
    manifest = json.loads((tmp_path / "g.manifest.json").read_text())
    assert manifest["output_paths"] == [str(out)]
    assert manifest["model_spec"] == "gamma:a=2"
    assert manifest["numeric_config"]["grid_n"] == 128
    assert set(manifest) == {"command", "argv", "model_spec", "numeric_config", "output_paths",
                             "tool_version"}


def test_density_exponential_is_flat(capsys):
    code, out, _ = run_cli(capsys, "density", "--model", "exp", "--d", "10")
    assert code == 0
    pdf = np.array([float(line.split(",")[2]) for line in out.splitlines()[2:]])
    assert np.allclose(pdf, 1.0, atol=1e-12)


def test_density_json_format(capsys):
    code, out, _ = run_cli(capsys, "density", "--model", "exp", "--d", "10", "--format", "json")
    assert code == 0 and json.loads(out)["model"] == "exp"


def test_density_empty_support_exit_3(capsys):
    code, _, err = run_cli(capsys, "density", "--model", "pareto:alpha=2,t0=1", "--d", "1")
    assert code == 3 and "empty" in err


@pytest.mark.parametrize("spec,key,value", [
    ("weibull:alpha=0.5", "behaviour", "TypeI"),
    ("expsqrt:-", "behaviour", "TypeI"),
    ("expsqrt:-", "tail_class", "Light"),
    ("gamma:a=2", "behaviour", "TheoremInapplicable"),
])
def test_analyze(capsys, spec, key, value):
    code, out, _ = run_cli(capsys, "analyze", "--model", spec)
    assert code == 0 and json.loads(out)[key] == value


def test_analyze_pareto_certificate_route(capsys):
    code, out, _ = run_cli(capsys, "analyze", "--model", "pareto:alpha=2,t0=1",
                           "--certify-pointwise")
    report = json.loads(out)
    assert code == 0 and report["behaviour"] == "TypeI"
    assert report["certificate"] == "vanishing"
    assert any("certificate" in n for n in report["notes"])


@pytest.mark.parametrize("spec,verdict", [
    ("gamma:a=3", "Stationary"), ("weibull:alpha=2", "TendsToTypeII"),
    ("lognormal:t0=0.01", "TendsToTypeI"),
])
def test_ladder(capsys, tmp_path, spec, verdict):
    stem = tmp_path / "lad"
    code, _, _ = run_cli(capsys, "ladder", "--model", spec, "--out", str(stem))
    assert code == 0
    assert json.loads((tmp_path / "lad.summary.json").read_text())["verdict"] == verdict
    lines = (tmp_path / "lad.csv").read_text().splitlines()
    assert lines[1].startswith("d,endpoint_mass,midpoint_mass,fzd_at_0.1")
    assert (tmp_path / "lad.manifest.json").exists()


def test_ladder_custom_flags(capsys):
    code, out, _ = run_cli(capsys, "ladder", "--model", "exp", "--d-ladder", "10,20",
                           "--eps", "0.1", "--x-probes", "0.2", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[1] == "d,endpoint_mass,midpoint_mass,fzd_at_0.2"
    assert float(lines[2].split(",")[1]) == pytest.approx(0.2)


def test_simulate_exponential(capsys, tmp_path):
    stem = tmp_path / "sim"
    code, _, _ = run_cli(capsys, "simulate", "--model", "exp", "--d", "10", "--delta", "0.1",
                         "--n", "5e4", "--seed", "3", "--out", str(stem))
    assert code == 0
    meta = json.loads((tmp_path / "sim.json").read_text())
    assert meta["ks_stat"] < 0.012 and meta["n_accepted"] == 50_000
    assert len((tmp_path / "sim.csv").read_text().splitlines()) == 50_002


def test_simulate_gamma(capsys):
    code, out, _ = run_cli(capsys, "simulate", "--model", "gamma:a=2", "--d", "8", "--delta",
                           "0.1", "--n", "5e4", "--seed", "9")
    assert code == 0 and json.loads(out)["ks_stat"] < 0.012


def test_simulate_acceptance_floor_exit_4(capsys):
    code, _, err = run_cli(capsys, "simulate", "--model", "weibull:alpha=2", "--d", "1e4",
                           "--delta", "1", "--n", "1e4")
    assert code == 4 and "pilot rate" in err


def test_corollary_demo(capsys, tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert run_cli(capsys, "corollary-demo", "--out-dir", str(first))[0] == 0
    assert run_cli(capsys, "corollary-demo", "--out-dir", str(second))[0] == 0
    summary = json.loads((first / "summary.json").read_text())
    assert summary["domination_trend"] == "decreasing"
    assert summary["Y"]["behaviour"] == "TypeI" and summary["Y"]["tail"] == "Light"
    assert summary["X"]["behaviour"] == "TypeII"
    names = sorted(p.name for p in first.iterdir())
    assert "manifest.json" in names and len(names) == 7
    for name in names:
        if name != "manifest.json":
            assert (first / name).read_bytes() == (second / name).read_bytes()


def test_corollary_demo_stdout(capsys):
    code, out, _ = run_cli(capsys, "corollary-demo")
    assert code == 0 and json.loads(out)["contradictions"] == []


def test_corollary_contradiction_exit_5(capsys, monkeypatch):
    # too short a grid for the ratio to fall below a tenth
    monkeypatch.setattr(cli, "DOMINATION_GRID", (10.0, 10.5))
    code, _, err = run_cli(capsys, "corollary-demo")
    assert code == 5 and "contradiction" in err


def test_replay_reproduces_bytes(capsys, tmp_path):
    stem = tmp_path / "w"
    run_cli(capsys, "ladder", "--model", "weibull:alpha=0.5", "--out", str(stem))
    before = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    for p in tmp_path.iterdir():
        p.unlink()
    (tmp_path / "w.manifest.json").write_bytes(before["w.manifest.json"])
    code, _, _ = run_cli(capsys, "replay", str(tmp_path / "w.manifest.json"))
    assert code == 0
    after = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    assert after == before


def test_replay_bad_manifest(capsys, tmp_path):
    bad = tmp_path / "m.json"
    bad.write_text("{}")
    assert run_cli(capsys, "replay", str(bad))[0] == 2


def test_show_defaults(capsys):
    code, out, _ = run_cli(capsys, "--show-defaults")
    table = json.loads(out)
    assert code == 0
    assert table["ladder"]["eps"] == 0.05 and table["simulate"]["floor"] == 1e-7
    assert table["quadrature"]["n_panels"] == 512


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bigjump", "list-models"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "pareto" in proc.stdout
