import math

import pytest

from jamsec import experiments
from jamsec.config import SystemConfig


def test_sweep_values():
    assert experiments.sweep_values(0, 1, 0.25) == [0, 0.25, 0.5, 0.75, 1.0]
    w = experiments.sweep_values(0, 30, 10, "dB")
    assert w == pytest.approx([1e-3, 1e-2, 1e-1, 1.0])
    g = experiments.sweep_values(1, 100, scale="log", num=3)
    assert g == pytest.approx([1, 10, 100])
    with pytest.raises(ValueError):
        experiments.sweep_values(0, 1, None)
    with pytest.raises(ValueError):
        experiments.sweep_values(0, 1, 0.1, "cubic")


def test_unknown_sweep_parameter():
    with pytest.raises(ValueError):
        experiments.sweep(SystemConfig(), "warp_factor", [1.0])


def test_heatmap_contains_optimum_neighbourhood():
    table, opt = experiments.heatmap("fig3b", SystemConfig(), step=0.25)
    assert table.columns == ("rt", "rs", "pi", "region")
    best_grid = max(r[2] for r in table.rows)
    assert best_grid <= opt.rows[0][2] * (1 + 1e-9)
    assert {r[3] for r in table.rows} >= {"D1", "D2", "infeasible"}


def test_fig4_rows_respect_bound():
    t = experiments.fig4(SystemConfig(), seed=0, blocks=20_000)
    assert len(t.rows) == len(experiments.PS_SWEEP_DBM)
    for ps, pi_opt, pi_sub, bound, sim in t.rows:
        assert pi_sub <= pi_opt <= bound
        assert math.isfinite(sim)


def test_fig2_traces():
    t = experiments.fig2(SystemConfig(), seed=0, blocks=2000, decimation=100)
    labels = {r[0] for r in t.rows}
    assert len(labels) == 6
    finite = [r for r in t.rows if r[2] != "infinite"]
    assert all(r[4] <= experiments.FINITE_CAPACITY for r in finite)


def test_parallel_map_matches_serial():
    items = [(SystemConfig(), "source_power", v) for v in (0.01, 0.1)]
    serial = experiments._map(experiments._sweep_point, items, 1)
    parallel = experiments._map(experiments._sweep_point, items, 2)
    assert serial == parallel


def test_unknown_figure():
    with pytest.raises(ValueError):
        experiments.figure("fig9", SystemConfig())
