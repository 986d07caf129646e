import json
import subprocess
import sys

import pytest

from pcslab import cli


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text("scenario = pcs_xz_pair\ngrid = 0, 0.2, 0.4\nengine = enumerate\n")
    return str(path)


def test_analytic(capsys):
    assert cli.main(["analytic", "--scheme", "pcs_x", "--grid", "0.25:1:0.25"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "scheme,F_in,F_out,rate,qubit_cost"
    assert len(lines) == 5 and lines[-1].startswith("pcs_x,1.0,1.0,1.0,4")


def test_sweep_writes_csv(config, tmp_path, capsys):
    out = tmp_path / "o.csv"
    assert cli.main(["sweep", "--config", config, "--out", str(out), "--seed", "9"]) == 0
    text = out.read_text()
    assert text.splitlines()[0].startswith("scenario,engine,r,p_channel")
    assert "config_hash=" in capsys.readouterr().err
    again = tmp_path / "p.csv"
    cli.main(["sweep", "--config", config, "--out", str(again), "--seed", "9"])
    assert again.read_bytes() == out.read_bytes()


def test_compare_pass(config, capsys):
    assert cli.main(["compare", "--config", config]) == 0
    assert "status: PASS" in capsys.readouterr().out


def test_compare_stat_gate_failure(config, capsys, monkeypatch):
    from pcslab import lab
    from pcslab.stabilizer import Estimate

    def biased(circ, n_shots, seed, workers):
        return Estimate(0.5, 0.001, 0.5, 0.001, None, seed)

    monkeypatch.setattr(lab, "estimate_bell_fidelity", biased)
    code = cli.main(["compare", "--config", config, "--engines", "enumerate,monte_carlo", "--shots", "10"])
    assert code == 3
    assert "status: FAIL" in capsys.readouterr().out


def test_compare_exact_disagreement(config, capsys, monkeypatch):
    from pcslab import lab

    real = lab._analytic
    monkeypatch.setattr(lab, "_analytic", lambda cfg, pt: tuple(v + 1e-6 for v in real(cfg, pt)))
    assert cli.main(["compare", "--config", config]) == 2


def test_usage_errors(capsys):
    assert cli.main([]) == 1
    assert cli.main(["sweep"]) == 1
    assert cli.main(["analytic", "--bogus"]) == 1
    assert cli.main(["reproduce", "fig99"]) == 1


def test_validation_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("scenario = warp\n")
    assert cli.main(["sweep", "--config", str(bad)]) == 2
    assert cli.main(["sweep", "--config", str(tmp_path / "missing.cfg")]) == 2
    big = tmp_path / "big.cfg"
    big.write_text("scenario = recursive_pcs\nr = 2\nengine = oracle\ngrid = 0.1\n")
    assert cli.main(["sweep", "--config", str(big)]) == 2
    assert "at most" in capsys.readouterr().err


def test_code_analyze(tmp_path, capsys):
    js = tmp_path / "c.json"
    assert cli.main(["code-analyze", "--r", "1", "2", "--json", str(js)]) == 0
    out = capsys.readouterr().out
    assert "[[5,1,2]]" in out and "[[7,1,2]]" in out
    assert "IIIZI" in out
    data = json.loads(js.read_text())
    assert [d["n"] for d in data] == [5, 7]


def test_graph_demo(tmp_path, capsys):
    g = tmp_path / "g.txt"
    g.write_text("0 1\n1 2\n2 0\n3\n")
    assert cli.main(["graph-demo", "--graph", str(g)]) == 0
    assert "minimum fidelity 1.0000" in capsys.readouterr().out
    assert cli.main(["graph-demo", "--n", "4", "--seed", "2"]) == 0


def test_reproduce_analytic(tmp_path):
    out = tmp_path / "f.csv"
    assert cli.main(["reproduce", "fig3b", "--out", str(out)]) == 0
    assert out.read_text().startswith("F,c_pcs_xz,c_bbpssw3")


def test_reproduce_strict_enumerate(capsys):
    code = cli.main(["reproduce", "fig8", "--engine", "enumerate", "--strict"])
    # without channel noise the extra recursion layer only adds gate faults
    assert code == 3
    assert "grid points" in capsys.readouterr().err


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "pcslab.cli", "analytic", "--scheme", "bbpssw", "--grid", "0.5"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.splitlines()[1].startswith("bbpssw,0.5,0.5")


@pytest.mark.parametrize("name", ["pcs_xz_exact.cfg", "swap_memory_mc.cfg"])
def test_shipped_configs_load(name):
    from pathlib import Path

    from pcslab import lab

    cfg = lab.load_config(str(Path(__file__).parent.parent / "configs" / name))
    assert len(cfg.grid) == 11
