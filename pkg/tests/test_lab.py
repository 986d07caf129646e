import csv
import io
from dataclasses import replace

import pytest

from pcslab import analytic, lab
from pcslab.errors import ResourceError, UnsupportedCircuitError, ValidationError


def test_parse_grid():
    assert lab.parse_grid("0:0.2:0.05") == [0.0, 0.05, 0.1, 0.15, 0.2]
    assert lab.parse_grid("0.1, 0.3 0.5") == [0.1, 0.3, 0.5]
    with pytest.raises(ValidationError):
        lab.parse_grid("0:1")
    with pytest.raises(ValidationError):
        lab.parse_grid("0:1:0")


def test_parse_config_round_trip():
    text = """
    # channel sweep
    scenario = swap
    check_mode = XZ
    protect = flying+memory
    grid = 0:0.5:0.25
    p_1q = 0.001
    p_2q = 0.01
    p_memory = none
    engine = monte_carlo
    n_shots = 100
    seed = 7
    """
    cfg = lab.parse_config("\n".join(line.strip() for line in text.splitlines()))
    assert cfg.grid == (0.0, 0.25, 0.5) and cfg.gate_noise == (0.001, 0.01)
    assert cfg.label() == "swap[XZ,flying+memory]"
    again = lab.parse_config(cfg.canonical())
    assert again == cfg and again.config_hash() == cfg.config_hash()


@pytest.mark.parametrize(
    "text",
    [
        "scenario = nope",
        "engine = fast",
        "colour = red",
        "grid = 0:2:1",
        "n_shots = many",
        "engine = monte_carlo",
        "grid = ",
        "sweep = F_in\ngrid = 0.1",
    ],
)
def test_bad_configs(text):
    with pytest.raises(ValidationError):
        lab.parse_config(text)


def test_hash_ignores_workers_only():
    a = lab.ExperimentConfig()
    assert a.config_hash() == replace(a, workers=4).config_hash()
    assert a.config_hash() != replace(a, seed=1).config_hash()


def test_enumerate_sweep_matches_formulas():
    cfg = lab.ExperimentConfig(scenario="pcs_x_pair", grid=tuple(i / 10 for i in range(11)))
    for row in lab.run_sweep(cfg).rows:
        pt = analytic.pcs_x_point_p(row.p_channel, row.p_channel)
        assert row.pass_rate == pytest.approx(pt.rate, abs=1e-12)
        assert row.fidelity == pytest.approx(pt.F_out, abs=1e-12)
        assert row.pass_stderr == 0 and row.fidelity_stderr == 0


def test_analytic_rows_are_exact():
    cfg = lab.ExperimentConfig(scenario="bbpssw", engine="analytic", sweep="F_in", grid=(0.6, 0.8), rounds=2)
    rows = lab.run_sweep(cfg).rows
    assert [r.n_shots for r in rows] == [0, 0]
    assert rows[1].fidelity == pytest.approx(analytic.bbpssw_recursive(0.8, 2).F_out)


def test_engine_compatibility_errors():
    big = lab.ExperimentConfig(scenario="recursive_pcs", r=2, engine="oracle", grid=(0.1,))
    with pytest.raises(ResourceError):
        lab.run_sweep(big)
    with pytest.raises(UnsupportedCircuitError):
        lab.run_sweep(lab.ExperimentConfig(scenario="swap", engine="analytic"))
    with pytest.raises(UnsupportedCircuitError):
        lab.run_sweep(lab.ExperimentConfig(scenario="bbpssw", sweep="F_in", grid=(0.7,), rounds=2))


def test_csv_schema_and_determinism():
    cfg = lab.ExperimentConfig(scenario="pcs_xz_pair", engine="monte_carlo", n_shots=500, seed=11, grid=(0.1, 0.3))
    a = lab.run_sweep(cfg).to_csv()
    b = lab.run_sweep(cfg).to_csv()
    assert a == b
    rows = list(csv.DictReader(io.StringIO(a)))
    assert tuple(rows[0]) == lab.CSV_COLUMNS
    assert all(r["seed"] == "11" and r["config_hash"] == cfg.config_hash() for r in rows)
    assert lab.run_sweep(replace(cfg, seed=12)).to_csv() != a


def test_worker_sharding_is_invariant():
    cfg = lab.ExperimentConfig(scenario="pcs_xz_pair", engine="monte_carlo", n_shots=600, seed=3, grid=(0.2,))
    one = lab.run_sweep(cfg).rows[0]
    three = lab.run_sweep(replace(cfg, workers=3)).rows[0]
    assert (one.pass_rate, one.fidelity) == (three.pass_rate, three.fidelity)


def test_point_seeds_differ():
    assert len({lab.point_seed(0, i) for i in range(50)}) == 50


@pytest.mark.parametrize(
    "cfg",
    [
        lab.ExperimentConfig(scenario="pcs_xz_pair", grid=(0.0, 0.2, 0.6)),
        lab.ExperimentConfig(scenario="pcs_x_pair", grid=(0.3,)),
        lab.ExperimentConfig(scenario="bbpssw", sweep="F_in", grid=(0.55, 0.9)),
        lab.ExperimentConfig(scenario="recursive_pcs", r=0, grid=(0.25,)),
    ],
)
def test_three_way_agreement(cfg):
    cmp = lab.compare_engines(cfg)
    assert {r.engine for r in cmp.rows} == {"analytic", "enumerate", "oracle"}
    assert cmp.exact_ok and cmp.max_exact_deviation < 1e-10
    assert "status: PASS" in cmp.report()


def test_noiseless_swap_all_engines_one():
    cfg = lab.ExperimentConfig(scenario="swap", grid=(0.0,), engine="monte_carlo", n_shots=200)
    cmp = lab.compare_engines(cfg)
    assert {r.engine for r in cmp.rows} == {"enumerate", "monte_carlo", "oracle"}
    for r in cmp.rows:
        assert r.fidelity == pytest.approx(1.0) and r.pass_rate == pytest.approx(1.0)
    assert cmp.exact_ok and cmp.mc_ok


def test_monte_carlo_within_gate():
    cfg = lab.ExperimentConfig(scenario="teleported_pcs", grid=(0.1,), p_1q=0.01, p_2q=0.02,
                               engine="monte_carlo", n_shots=4000, seed=5)
    cmp = lab.compare_engines(cfg, ["enumerate", "monte_carlo"])
    assert cmp.mc_ok and cmp.max_sigma <= lab.GATE_SIGMA


def test_compare_needs_two_engines():
    with pytest.raises(ValidationError):
        lab.compare_engines(lab.ExperimentConfig(), ["enumerate"])


def test_analytic_figures():
    fig = lab.reproduce_figure("fig2a")
    assert fig.columns == ("F", "F_pcs_x", "F_bbpssw1", "diagonal")
    assert fig.rows[0]["F"] == 0.25 and fig.rows[-1]["F"] == 1.0
    assert lab.reproduce_figure("fig2b").columns == ("F", "F_pcs_xz", "F_bbpssw2", "F_bbpssw3", "diagonal")
    assert lab.reproduce_figure("fig3b").columns == ("F", "c_pcs_xz", "c_bbpssw3")
    with pytest.raises(ValidationError):
        lab.reproduce_figure("fig9")


def test_fig7_enumerated():
    fig = lab.reproduce_figure("fig7a", engine="enumerate")
    assert len(fig.rows) == len(lab.CHANNEL_GRID)
    assert all(r["F_unprotected_stderr"] == 0 for r in fig.rows)
    assert any("grid points" in n for n in fig.notes)
