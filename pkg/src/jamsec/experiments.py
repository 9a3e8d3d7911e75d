"""Figure reproductions, parameter sweeps and the end-to-end self-check.

Everything here returns plain rows; writing CSV files is left to ``write_csv``
so callers control the output location. Results depend only on the config
and seed, never on wall-clock or worker scheduling.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import analysis, optimizer
from .config import RatePair, SystemConfig, dbm_to_watts, derive_constants
from .simulator import SimParams, run

FIGURES = ("fig2", "fig3a", "fig3b", "fig4", "fig5a", "fig5b", "fig6a", "fig6b")

FIGURE_COLUMNS = {
    "fig2": ("trace", "rt", "capacity_j", "block", "battery_j"),
    "fig3a": ("rt", "rs", "pi", "region"),
    "fig3b": ("rt", "rs", "pi", "region"),
    "fig5a": ("rt", "rs", "pi", "region"),
    "fig5b": ("rt", "rs", "pi", "region"),
    "fig4": ("ps_dbm", "pi_opt", "pi_subopt", "pi_upper", "pi_sim_finite"),
    "fig6a": ("ps_dbm", "pi_opt", "pi_subopt", "pi_sim_finite"),
    "fig6b": ("nj", "pi_opt", "pi_subopt", "pi_upper"),
}
OPTIMUM_COLUMNS = ("rt", "rs", "pi", "region", "jamming_power_w", "solver_path")

FINITE_CAPACITY = 1e-4  # J, the finite battery used alongside the infinite-battery curves
FIG2_RATES = (26.90, 26.95, 27.00)
PS_SWEEP_DBM = tuple(float(x) for x in np.arange(-10.0, 40.0 + 1e-9, 2.5))
NJ_SWEEP = tuple(range(2, 65))
HEATMAP_PRESETS = {
    "fig3a": (1, 0.0),
    "fig3b": (1, 30.0),
    "fig5a": (8, 0.0),
    "fig5b": (8, 30.0),
}


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple[str, ...]
    rows: list[tuple]


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: str | Path, table: Table) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _map(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


# --- figures ------------------------------------------------------------------


def fig2(cfg: SystemConfig, seed: int, blocks: int = 200_000, decimation: int = 100) -> Table:
    """Battery energy traces around the accumulation boundary (8 antennas, 30 dBm source, 0 dBm jamming)."""
    base = cfg.replace(jammer_antennas=8, source_power=dbm_to_watts(30.0))
    rows = []
    stream = 0
    for capacity in (None, FINITE_CAPACITY):
        for rt in FIG2_RATES:
            c = base.replace(battery_capacity=capacity)
            params = SimParams(
                rates=RatePair(rt, 0.0),
                jamming_power=dbm_to_watts(0.0),
                n_blocks=blocks,
                seed=seed,
                stream=stream,
                trace_decimation=decimation,
            )
            stream += 1
            _, trace = run(c, params)
            label = f"{'inf' if capacity is None else 'finite'}_rt{rt:.2f}"
            cap = "infinite" if capacity is None else capacity
            rows.extend((label, rt, cap, int(b), float(e)) for b, e in zip(trace.block, trace.battery))
    return Table("fig2", FIGURE_COLUMNS["fig2"], rows)


def heatmap(name: str, cfg: SystemConfig, step: float = 0.05) -> tuple[Table, Table]:
    """Throughput over the rate plane plus the optimum, for one of the rate-region figures."""
    nj, ps_dbm = HEATMAP_PRESETS[name]
    c = cfg.replace(jammer_antennas=nj, source_power=dbm_to_watts(ps_dbm))
    best = optimizer.solve(c)
    rt_hi = math.ceil(best.rates.rt + 5.0)
    rs_hi = math.ceil(best.rates.rs + 3.0)
    rt = np.arange(0, int(round(rt_hi / step)) + 1) * step
    rs = np.arange(0, int(round(rs_hi / step)) + 1) * step
    RT, RS = np.meshgrid(rt, rs, indexing="ij")
    pi = analysis.throughput_surface(RT, RS, c)
    a, b = analysis.throughput_terms(RT, RS, c)
    rows = []
    for i in range(rt.size):
        for j in range(rs.size):
            if rs[j] >= rt[i]:
                region = "infeasible"
            else:
                region = analysis.region_of(float(a[i, j]), float(b[i, j])).value
            rows.append((float(rt[i]), float(rs[j]), float(pi[i, j]), region))
    opt_row = (
        best.rates.rt,
        best.rates.rs,
        best.pi,
        best.region.value,
        best.jamming_power,
        best.solver_path.value,
    )
    return (
        Table(name, FIGURE_COLUMNS[name], rows),
        Table(f"{name}_optimum", OPTIMUM_COLUMNS, [opt_row]),
    )


def _simulated_throughput(c: SystemConfig, best: optimizer.OptResult, seed: int, stream: int, blocks: int) -> float:
    if best.pi <= 0 or not math.isfinite(best.jamming_power):
        return 0.0
    summary, _ = run(
        c.replace(battery_capacity=FINITE_CAPACITY),
        SimParams(rates=best.rates, jamming_power=best.jamming_power, n_blocks=blocks, seed=seed, stream=stream),
    )
    return summary.p_tx * best.rates.rs


def _fig4_point(args) -> tuple:
    cfg, ps, seed, stream, blocks = args
    c = cfg.replace(jammer_antennas=1, source_power=dbm_to_watts(ps))
    best = optimizer.solve_single_antenna(c)
    asym = optimizer.asymptotic_single_antenna(c)
    return (ps, best.pi, asym.pi, asym.pi_bound, _simulated_throughput(c, best, seed, stream, blocks))


def fig4(cfg: SystemConfig, seed: int, blocks: int = 1_000_000, jobs: int = 1) -> Table:
    items = [(cfg, ps, seed, k, blocks) for k, ps in enumerate(PS_SWEEP_DBM)]
    return Table("fig4", FIGURE_COLUMNS["fig4"], _map(_fig4_point, items, jobs))


def _fig6a_point(args) -> tuple:
    cfg, ps, seed, stream, blocks = args
    c = cfg.replace(jammer_antennas=8, source_power=dbm_to_watts(ps))
    best = optimizer.solve_multi_antenna(c)
    asym = optimizer.asymptotic_multi_antenna_high_snr(c)
    return (ps, best.pi, asym.pi, _simulated_throughput(c, best, seed, stream, blocks))


def fig6a(cfg: SystemConfig, seed: int, blocks: int = 1_000_000, jobs: int = 1) -> Table:
    items = [(cfg, ps, seed, k, blocks) for k, ps in enumerate(PS_SWEEP_DBM)]
    return Table("fig6a", FIGURE_COLUMNS["fig6a"], _map(_fig6a_point, items, jobs))


def fig6b(cfg: SystemConfig) -> Table:
    base = cfg.replace(source_power=dbm_to_watts(30.0))
    rows = []
    for nj in NJ_SWEEP:
        c = base.replace(jammer_antennas=nj)
        best = optimizer.solve_multi_antenna(c)
        asym = optimizer.asymptotic_large_nj(c)
        rows.append((nj, best.pi, asym.pi, asym.pi_bound))
    return Table("fig6b", FIGURE_COLUMNS["fig6b"], rows)


def figure(name: str, cfg: SystemConfig, seed: int = 0, blocks: int = 1_000_000, jobs: int = 1) -> list[Table]:
    if name == "fig2":
        return [fig2(cfg, seed, blocks=min(blocks, 200_000))]
    if name in HEATMAP_PRESETS:
        return list(heatmap(name, cfg))
    if name == "fig4":
        return [fig4(cfg, seed, blocks, jobs)]
    if name == "fig6a":
        return [fig6a(cfg, seed, blocks, jobs)]
    if name == "fig6b":
        return [fig6b(cfg)]
    raise ValueError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")


# --- sweeps -------------------------------------------------------------------

SWEEP_COLUMNS = ("rt_opt", "rs_opt", "pj_opt_w", "pi_opt", "p_tx", "region", "solver_path")
_POWER_PARAMS = {"source_power": "source_power", "noise_power": "noise_power"}


def sweep_values(start: float, stop: float, step: float | None = None, scale: str = "linear", num: int | None = None):
    """Sweep axis. 'dB' takes dBm start/stop/step and returns watts; 'log' is geometric with ``num`` points."""
    if scale == "log":
        if num is None or num < 1 or start <= 0 or stop <= 0:
            raise ValueError("log sweeps need positive start/stop and num >= 1")
        return list(np.geomspace(start, stop, num))
    if step is None or step <= 0:
        raise ValueError("linear and dB sweeps need a positive step")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    if n < 1:
        raise ValueError("empty sweep range")
    pts = [start + k * step for k in range(n)]
    if scale == "dB":
        return [dbm_to_watts(p) for p in pts]
    if scale == "linear":
        return pts
    raise ValueError(f"unknown scale {scale!r}")


def _sweep_point(args) -> tuple:
    cfg, param, value = args
    if param == "jammer_antennas":
        value = int(round(value))
    try:
        c = cfg.replace(**{param: value})
    except TypeError:
        raise ValueError(f"cannot sweep unknown parameter {param!r}") from None
    best = optimizer.solve(c)
    rep = analysis.throughput(best.rates, c)
    return (
        value,
        best.rates.rt,
        best.rates.rs,
        best.jamming_power,
        best.pi,
        rep.p_tx,
        best.region.value,
        best.solver_path.value,
    )


def sweep(cfg: SystemConfig, param: str, values: Iterable[float], jobs: int = 1) -> Table:
    param = param.removesuffix("_dbm").removesuffix("_watts") if param.split("_")[0] in ("source", "noise") else param
    items = [(cfg, param, float(v)) for v in values]
    return Table("sweep", (param,) + SWEEP_COLUMNS, _map(_sweep_point, items, jobs))


# --- self-check ---------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def _analytic_ptx(rates: RatePair, cfg: SystemConfig, pj: float, energy_term_scale: float = 1.0) -> float:
    odds = analysis.outage_odds(rates, cfg, pj)
    if math.isinf(odds):
        return 0.0
    energy = energy_term_scale * pj * cfg.block_time / derive_constants(cfg).rho_j
    return 1.0 / (1.0 + max(energy, odds))


def validate(
    cfg: SystemConfig,
    blocks: int = 1_000_000,
    seed: int = 0,
    grid_step: float = 0.01,
    mutate: bool = False,
    n_se: float = 3.0,
) -> list[Check]:
    """Solver-vs-oracle and analysis-vs-simulation checks for one configuration.

    ``mutate`` corrupts the jamming-energy term of the throughput expression
    (scaled by 1.5) to show the checks catch a broken formula.
    """
    scale = 1.5 if mutate else 1.0
    checks: list[Check] = []

    best = optimizer.solve(cfg)
    grid = optimizer.grid_oracle(cfg, step=grid_step)
    g = grid.best.pi
    ok = g - grid.slack <= best.pi <= g * 1.001
    checks.append(
        Check("optimizer_vs_grid", ok, f"pi*={best.pi:.6g} grid={g:.6g} slack={grid.slack:.3g} step={grid_step}")
    )
    if cfg.jammer_antennas >= 2:
        a, b = best.term_a, best.term_b
        rel = abs(a - b) / max(abs(a), abs(b), 1e-300)
        checks.append(Check("balanced_boundary", rel <= 1e-9, f"(a)={a:.12g} (b)={b:.12g} rel={rel:.2g}"))

    pj_star = best.jamming_power
    for k, factor in enumerate((1.0, 0.5, 2.0)):
        pj = factor * pj_star
        summary, _ = run(cfg, SimParams(rates=best.rates, jamming_power=pj, n_blocks=blocks, seed=seed, stream=k))
        expected = _analytic_ptx(best.rates, cfg, pj, scale)
        z = (summary.p_tx - expected) / summary.se_p_tx
        regime = analysis.classify_regime(best.rates, cfg, pj).tag.value
        checks.append(
            Check(
                f"p_tx_sim_{factor:g}xPJ",
                abs(z) < n_se,
                f"{regime}: sim={summary.p_tx:.6g} analytic={expected:.6g} z={z:+.2f}",
            )
        )
        if factor == 1.0:
            if summary.n_it >= 1000:
                zs = (summary.p_so - cfg.secrecy_constraint) / summary.se_p_so
                checks.append(
                    Check(
                        "secrecy_outage_per_IT_block",
                        abs(zs) < n_se,
                        f"sim={summary.p_so:.5g} eps={cfg.secrecy_constraint} z={zs:+.2f} n_it={summary.n_it}",
                    )
                )
            else:
                checks.append(Check("secrecy_outage_per_IT_block", True, f"skipped: only {summary.n_it} IT blocks"))
    return checks
