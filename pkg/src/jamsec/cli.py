"""Command-line entry point: ``jamsec <command> [options]``.

Exit codes: 0 success, 1 usage or config error, 2 validation failure,
3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__, analysis, experiments, optimizer
from .config import ConfigError, RatePair, SystemConfig, dbm_to_watts, load_config, watts_to_dbm
from .numerics import BracketError, ConvergenceError
from .simulator import TRACE_HEADER, SimParams, run

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_SOLVER = 0, 1, 2, 3

CSV_HELP = f"""\
CSV outputs (floats written with full round-trip precision):
  simulate:   summary.csv  metric,value
              trace.csv    {','.join(TRACE_HEADER)}   (kind is D, O or I; only with --decimate)
  sweep:      sweep.csv    <param>,{','.join(experiments.SWEEP_COLUMNS)}
  figure:     fig2.csv     {','.join(experiments.FIGURE_COLUMNS['fig2'])}
              fig3a/fig3b/fig5a/fig5b.csv  rt,rs,pi,region  plus <name>_optimum.csv {','.join(experiments.OPTIMUM_COLUMNS)}
              fig4.csv     {','.join(experiments.FIGURE_COLUMNS['fig4'])}
              fig6a.csv    {','.join(experiments.FIGURE_COLUMNS['fig6a'])}
              fig6b.csv    {','.join(experiments.FIGURE_COLUMNS['fig6b'])}
Every command that writes files also writes manifest.json (figure: <name>_manifest.json)
recording the config, seed, package versions and output files.
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit with 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config entry")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--blocks", type=int, default=1_000_000, help="simulated blocks")
    p.add_argument("--grid-step", type=float, default=0.01, help="rate lattice step of the grid oracle")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps and figures")
    return p


def _rates_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--rt", type=float, required=required, help="codeword rate (bits/channel use)")
    p.add_argument("--rs", type=float, required=required, help="secrecy rate (bits/channel use)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--pj-watts", type=float, help="jamming power (default: secrecy-optimal)")
    g.add_argument("--pj-dbm", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="jamsec",
        description="Throughput analysis, rate optimization and simulation for a wireless-powered jammer.",
        epilog=CSV_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"jamsec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common()
    kw = dict(parents=[common], formatter_class=argparse.RawDescriptionHelpFormatter, epilog=CSV_HELP)

    p = sub.add_parser("analyze", help="closed-form throughput at given rates", **kw)
    _rates_args(p)

    p = sub.add_parser("optimize", help="throughput-optimal rates", **kw)
    p.add_argument("--check-grid", action="store_true", help="also run the grid oracle")

    p = sub.add_parser("simulate", help="Monte-Carlo block simulation", **kw)
    _rates_args(p, required=False)
    p.add_argument("--decimate", type=int, default=0, help="record every k-th block to trace.csv")
    p.add_argument("--initial-energy", type=float, default=0.0, help="initial battery energy (J)")

    p = sub.add_parser("sweep", help="optimal design along one parameter", **kw)
    p.add_argument("--param", required=True, help="config field, e.g. source_power or jammer_antennas")
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--step", type=float)
    p.add_argument("--num", type=int, help="points for --scale log")
    p.add_argument("--scale", choices=("linear", "dB", "log"), default="linear", help="dB: start/stop/step in dBm")

    p = sub.add_parser("validate", help="solver and simulator self-check", **kw)
    p.add_argument("--mutate", action="store_true", help="corrupt the jamming-energy term; checks must fail")

    p = sub.add_parser("figure", help="regenerate a figure's data", **kw)
    p.add_argument("name", choices=experiments.FIGURES)
    return parser


def _jamming_power(args, rates: RatePair, cfg: SystemConfig) -> float:
    if args.pj_watts is not None:
        return args.pj_watts
    if args.pj_dbm is not None:
        return dbm_to_watts(args.pj_dbm)
    return analysis.optimal_jamming_power(rates, cfg)


def _out_dir(args) -> Path:
    out = Path(args.out or "jamsec_out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _manifest(
    out: Path, args, cfg: SystemConfig, outputs: list[str], extra: dict | None = None, name: str = "manifest.json"
) -> None:
    m = {
        "command": args.command,
        "config": cfg.to_dict(),
        "seed": args.seed,
        "blocks": args.blocks,
        "grid_step": args.grid_step,
        "outputs": outputs,
        "versions": {
            "jamsec": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    }
    if extra:
        m.update(extra)
    (out / name).write_text(json.dumps(m, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _print_result(label: str, r: optimizer.OptResult) -> None:
    pj = f"{r.jamming_power:.6g} W ({watts_to_dbm(r.jamming_power):.3f} dBm)" if r.jamming_power > 0 else "n/a"
    print(f"{label}: rt={r.rates.rt:.6f} rs={r.rates.rs:.6f} pi={r.pi:.8g} region={r.region.value} "
          f"path={r.solver_path.value} P_J={pj}")
    if r.pi_bound is not None:
        print(f"  closed-form value: {r.pi_bound:.8g}")


def cmd_analyze(args, cfg):
    rates = RatePair(args.rt, args.rs)
    pj = _jamming_power(args, rates, cfg)
    rep = analysis.throughput(rates, cfg) if args.pj_watts is None and args.pj_dbm is None else None
    p_tx = analysis.transmission_probability(rates, cfg, pj)
    regime = analysis.classify_regime(rates, cfg, pj)
    print(f"rates: rt={rates.rt} rs={rates.rs}")
    print(f"jamming power: {pj:.6g} W ({watts_to_dbm(pj):.3f} dBm)" if pj > 0 else "jamming power: 0")
    print(f"p_co={analysis.connection_outage(rates, cfg, pj):.8g} p_so={analysis.secrecy_outage(rates, cfg, pj):.8g}")
    print(f"p_tx={p_tx:.8g} throughput={p_tx * rates.rs:.8g} regime={regime.tag.value}")
    if rep is not None:
        print(f"term_a={rep.term_a:.8g} term_b={rep.term_b:.8g} region={rep.region.value}")
    return EXIT_OK


def cmd_optimize(args, cfg):
    best = optimizer.solve(cfg)
    _print_result("optimum", best)
    if cfg.jammer_antennas == 1:
        _print_result("high-SNR design", optimizer.asymptotic_single_antenna(cfg))
    else:
        _print_result("high-SNR design", optimizer.asymptotic_multi_antenna_high_snr(cfg))
        _print_result("large-array design", optimizer.asymptotic_large_nj(cfg))
    if args.check_grid:
        g = optimizer.grid_oracle(cfg, step=args.grid_step)
        _print_result(f"grid (step {args.grid_step})", g.best)
    if args.out:
        out = _out_dir(args)
        table = experiments.Table(
            "optimum",
            experiments.OPTIMUM_COLUMNS,
            [(best.rates.rt, best.rates.rs, best.pi, best.region.value, best.jamming_power, best.solver_path.value)],
        )
        experiments.write_csv(out / "optimum.csv", table)
        _manifest(out, args, cfg, ["optimum.csv"])
    return EXIT_OK


def cmd_simulate(args, cfg):
    if args.rt is None or args.rs is None:
        best = optimizer.solve(cfg)
        rates = best.rates
    else:
        rates = RatePair(args.rt, args.rs)
    pj = _jamming_power(args, rates, cfg)
    params = SimParams(
        rates=rates,
        jamming_power=pj,
        n_blocks=args.blocks,
        seed=args.seed,
        initial_energy=args.initial_energy,
        trace_decimation=args.decimate,
    )
    s, trace = run(cfg, params)
    expected = analysis.transmission_probability(rates, cfg, pj)
    print(f"rates: rt={rates.rt:.6f} rs={rates.rs:.6f} P_J={pj:.6g} W")
    print(f"p_tx={s.p_tx:.6g} (se {s.se_p_tx:.2g}, analytic {expected:.6g})  throughput={s.p_tx * rates.rs:.6g}")
    print(f"p_co={s.p_co:.6g}  p_so per IT block={s.p_so:.6g}  blocks IT/D/O={s.n_it}/{s.n_dedicated}/{s.n_opportunistic}")
    print(f"mean harvested power={s.mean_harvested_power:.6g} W  final energy={s.final_energy:.6g} J")
    if args.out:
        out = _out_dir(args)
        metrics = [
            ("p_tx", s.p_tx), ("se_p_tx", s.se_p_tx), ("p_tx_analytic", expected),
            ("p_co", s.p_co), ("se_p_co", s.se_p_co), ("p_so", s.p_so), ("se_p_so", s.se_p_so),
            ("throughput", s.p_tx * rates.rs), ("n_blocks", s.n_blocks), ("n_warmup", s.n_warmup),
            ("n_it", s.n_it), ("n_dedicated", s.n_dedicated), ("n_opportunistic", s.n_opportunistic),
            ("mean_harvested_power_w", s.mean_harvested_power), ("final_energy_j", s.final_energy),
            ("total_harvested_j", s.total_harvested), ("total_consumed_j", s.total_consumed),
            ("total_overflow_j", s.total_overflow),
        ]
        experiments.write_csv(out / "summary.csv", experiments.Table("summary", ("metric", "value"), metrics))
        outputs = ["summary.csv"]
        if trace is not None:
            trace.to_csv(out / "trace.csv")
            outputs.append("trace.csv")
        _manifest(out, args, cfg, outputs, {"rates": [rates.rt, rates.rs], "jamming_power": pj})
    return EXIT_OK


def cmd_sweep(args, cfg):
    values = experiments.sweep_values(args.start, args.stop, args.step, args.scale, args.num)
    table = experiments.sweep(cfg, args.param, values, jobs=args.jobs)
    out = _out_dir(args)
    experiments.write_csv(out / "sweep.csv", table)
    _manifest(out, args, cfg, ["sweep.csv"], {"sweep": {"param": args.param, "scale": args.scale,
                                                       "start": args.start, "stop": args.stop,
                                                       "step": args.step, "num": args.num}})
    print(f"wrote {len(table.rows)} rows to {out / 'sweep.csv'}")
    return EXIT_OK


def cmd_validate(args, cfg):
    checks = experiments.validate(cfg, blocks=args.blocks, seed=args.seed, grid_step=args.grid_step,
                                  mutate=args.mutate)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}")
    ok = all(c.passed for c in checks)
    print("validation passed" if ok else "validation FAILED")
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_figure(args, cfg):
    tables = experiments.figure(args.name, cfg, seed=args.seed, blocks=args.blocks, jobs=args.jobs)
    out = _out_dir(args)
    names = []
    for t in tables:
        experiments.write_csv(out / f"{t.name}.csv", t)
        names.append(f"{t.name}.csv")
    _manifest(out, args, cfg, names, {"figure": args.name}, name=f"{args.name}_manifest.json")
    print("wrote " + ", ".join(str(out / n) for n in names))
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "optimize": cmd_optimize,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
    "figure": cmd_figure,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.set)
        return COMMANDS[args.command](args, cfg)
    except (optimizer.SolverError, BracketError, ConvergenceError) as exc:
        print(f"jamsec: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigError, ValueError) as exc:
        print(f"jamsec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
