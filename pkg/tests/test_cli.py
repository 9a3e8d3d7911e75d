import csv
import json

import pytest

from jamsec import cli, experiments, optimizer


def _rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_analyze(capsys):
    rc = cli.main(["analyze", "--rt", "10", "--rs", "2", "--set", "jammer_antennas=1", "--pj-dbm", "-13"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "p_tx=0.3896797" in out and "EnergyBalanced" in out


def test_optimize_writes_csv_and_manifest(tmp_path, capsys):
    rc = cli.main(["optimize", "--out", str(tmp_path)])
    assert rc == 0
    rows = _rows(tmp_path / "optimum.csv")
    assert tuple(rows[0]) == experiments.OPTIMUM_COLUMNS
    assert rows[1][3] == "D_hat" and rows[1][5] == "Prop3"
    m = json.loads((tmp_path / "manifest.json").read_text())
    assert m["config"]["jammer_antennas"] == 8 and "numpy" in m["versions"]


def test_config_file(tmp_path, capsys):
    p = tmp_path / "run.cfg"
    p.write_text("jammer_antennas = 1\nsource_power_dbm = 30\n")
    assert cli.main(["optimize", "--config", str(p)]) == 0
    assert "Prop2-CaseI" in capsys.readouterr().out


def test_simulate_outputs(tmp_path, capsys):
    rc = cli.main(
        ["simulate", "--rt", "26.9", "--rs", "1", "--pj-dbm", "0", "--blocks", "5000", "--decimate", "10", "--out", str(tmp_path)]
    )
    assert rc == 0
    trace = _rows(tmp_path / "trace.csv")
    assert len(trace) == 501
    summary = dict(_rows(tmp_path / "summary.csv")[1:])
    assert 0 < float(summary["p_tx"]) < 1


def test_sweep_db_scale(tmp_path, capsys):
    rc = cli.main(["sweep", "--param", "source_power", "--scale", "dB", "--start", "0", "--stop", "20", "--step", "10", "--out", str(tmp_path)])
    assert rc == 0
    rows = _rows(tmp_path / "sweep.csv")
    assert rows[0][0] == "source_power" and len(rows) == 4
    pis = [float(r[4]) for r in rows[1:]]
    assert pis == sorted(pis)


def test_sweep_antennas_integer(tmp_path, capsys):
    assert cli.main(["sweep", "--param", "jammer_antennas", "--start", "1", "--stop", "3", "--step", "1", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "sweep.csv")
    assert [r[0] for r in rows[1:]] == ["1", "2", "3"]


def test_figure_output_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert cli.main(["figure", "fig6b", "--out", str(d)]) == 0
    assert (a / "fig6b.csv").read_bytes() == (b / "fig6b.csv").read_bytes()
    assert (a / "fig6b_manifest.json").read_bytes() == (b / "fig6b_manifest.json").read_bytes()
    rows = _rows(a / "fig6b.csv")
    assert tuple(rows[0]) == experiments.FIGURE_COLUMNS["fig6b"] and len(rows) == 64


def test_validate_passes_and_mutation_fails(capsys):
    assert cli.main(["validate", "--blocks", "200000", "--grid-step", "0.02"]) == 0
    out = capsys.readouterr().out
    assert "validation passed" in out
    assert cli.main(["validate", "--blocks", "200000", "--grid-step", "0.02", "--mutate"]) == 2
    assert "FAIL" in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv",
    [
        ["nonsense"],
        ["analyze", "--rt", "1"],
        ["optimize", "--set", "bogus=1"],
        ["optimize", "--set", "secrecy_constraint=2"],
        ["analyze", "--rt", "1", "--rs", "2"],
        ["sweep", "--param", "d_SJ", "--start", "1", "--stop", "2"],
    ],
)
def test_usage_and_config_errors_exit_1(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(cli.main(argv))
    assert exc.value.code == 1


def test_solver_failure_exit_3(monkeypatch, capsys):
    def boom(cfg):
        raise optimizer.SolverError("no bracket")

    monkeypatch.setattr(optimizer, "solve", boom)
    assert cli.main(["optimize"]) == 3


def test_help_documents_csv_schemas(capsys):
    with pytest.raises(SystemExit):
        cli.main(["figure", "--help"])
    out = capsys.readouterr().out
    assert "ps_dbm,pi_opt,pi_subopt,pi_upper,pi_sim_finite" in out
    assert "block,kind,battery_j" in out
