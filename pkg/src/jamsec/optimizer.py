"""Throughput-optimal rate parameters and jamming power under a secrecy-outage constraint.

Exact solvers for a single-antenna jammer (two-case procedure) and a
multi-antenna jammer (balanced-boundary solve), the three asymptotic
designs, and a brute-force grid search used as an independent check.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import analysis
from .analysis import LN2, Region
from .config import RatePair, SystemConfig, derive_constants
from .numerics import (
    BracketError,
    Monotonicity,
    RootSpec,
    find_root,
    lambert_w0,
    sign_change_brackets,
)

Z_MAX = 2.0**60
SCAN_POINTS = 400


class SolverPath(str, enum.Enum):
    PROP2_CASE_I = "Prop2-CaseI"
    PROP2_CASE_II = "Prop2-CaseII"
    PROP3 = "Prop3"
    COROLLARY1 = "Corollary1"
    COROLLARY2 = "Corollary2"
    COROLLARY3 = "Corollary3"
    GRID_ORACLE = "GridOracle"


class SolverError(RuntimeError):
    """A stationarity equation could not be bracketed or solved."""


@dataclass(frozen=True)
class AuxVars:
    xi: float | None = None
    zeta: float | None = None
    zeta_prime: float | None = None
    z: float | None = None


@dataclass(frozen=True)
class OptResult:
    """Optimal (or asymptotic) design.

    ``pi`` is always the exact throughput of ``rates`` at ``jamming_power``.
    Asymptotic designs also carry the closed-form ``pi_bound`` they come with.
    """

    rates: RatePair
    jamming_power: float
    pi: float
    region: Region
    solver_path: SolverPath
    iterations: int = 0
    residuals: dict = field(default_factory=dict)
    aux: AuxVars = AuxVars()
    asymptotic: bool = False
    pi_bound: float | None = None
    term_a: float = math.nan
    term_b: float = math.nan


def _result(rates, cfg, path, **kw) -> OptResult:
    if rates.rt <= rates.rs:
        return OptResult(rates=rates, jamming_power=math.inf, pi=0.0, region=Region.D1, solver_path=path, **kw)
    rep = analysis.throughput(rates, cfg)
    return OptResult(
        rates=rates,
        jamming_power=rep.jamming_power,
        pi=rep.pi,
        region=rep.region,
        solver_path=path,
        term_a=rep.term_a,
        term_b=rep.term_b,
        **kw,
    )


def _exp2m1(x: float) -> float:
    return math.expm1(x * LN2)


# --- single-antenna jammer ----------------------------------------------------


def xi_of_rs(rs: float, rho_d: float, k2: float) -> float:
    """Positive root of the quadratic giving the optimal 2^(rt-rs) - 1 for a fixed rs."""
    s = 2.0**rs
    denom = 1.0 + k2 * s
    lin = k2 * _exp2m1(rs) / denom
    const = rho_d * k2 * (-math.expm1(-rs * LN2)) / denom
    # numerically stable form of (-lin + sqrt(lin^2 + 4 const)) / 2
    return 2.0 * const / (lin + math.sqrt(lin * lin + 4.0 * const))


def case_one_lhs(rs: float, rho_d: float, k2: float) -> float:
    """Left side minus one of the stationarity condition in rs (energy-accumulation case)."""
    xi = xi_of_rs(rs, rho_d, k2)
    s = 2.0**rs
    return k2 * (s + _exp2m1(rs) / xi) * (rs * LN2 - 1.0 + rs * LN2 / xi) - 1.0


def _zeta_parts(rt: float, rho_d: float, k1: float, k2: float):
    theta = _exp2m1(rt)
    u = theta / rho_d
    em1 = math.expm1(u)
    e = em1 + 1.0
    zeta = (k1 - k2 * e * theta) / em1
    # d(zeta)/d(rt); the chain rule through theta = 2^rt - 1 contributes ln2 * 2^rt
    zeta_prime = (
        LN2 * (theta + 1.0) * e / em1**2 * (k2 * (theta + 1.0) / rho_d - k2 * em1 - (k1 + k2) / rho_d)
    )
    return zeta, zeta_prime


def zeta_of_rt(rt: float, rho_d: float, k1: float, k2: float) -> float:
    """2^(rt-rs) - 1 on the balanced boundary where terms (a) and (b) coincide."""
    return _zeta_parts(rt, rho_d, k1, k2)[0]


def zeta_prime_of_rt(rt: float, rho_d: float, k1: float, k2: float) -> float:
    return _zeta_parts(rt, rho_d, k1, k2)[1]


def boundary_throughput(rt: float, rho_d: float, k1: float, k2: float) -> float:
    """Throughput along the balanced boundary as a function of rt (single antenna)."""
    zeta = zeta_of_rt(rt, rho_d, k1, k2)
    if not zeta > 0:
        return 0.0
    rs = rt - math.log2(1.0 + zeta)
    return rs / (1.0 + k1 / zeta)


def case_two_stationarity(rt: float, rho_d: float, k1: float, k2: float) -> float:
    """Derivative-sign function of the boundary throughput, scaled by (1 + k1/zeta)^2.

    Positive where the boundary throughput increases with rt; NaN where zeta
    has rounded to a non-positive value right at the edge of its domain.
    """
    zeta, zp = _zeta_parts(rt, rho_d, k1, k2)
    if not zeta > 0:
        return math.nan
    rs = rt - math.log2(1.0 + zeta)
    g = 1.0 + k1 / zeta
    return (1.0 - zp / (LN2 * (1.0 + zeta))) * g + rs * k1 * zp / zeta**2


def _rt_zeta_positive_limit(rho_d: float, k1: float, k2: float) -> float:
    """Largest rt with zeta > 0, i.e. the root of k1 = k2 e^(theta/rho_d) theta."""

    def h(rt):
        theta = _exp2m1(rt)
        return k1 - k2 * math.exp(min(theta / rho_d, 700.0)) * theta

    hi = math.log2(1.0 + k1 / k2)
    return find_root(h, RootSpec(1e-12, hi, abs_tol=1e-14, monotonicity=Monotonicity.DECREASING))


def solve_single_antenna(cfg: SystemConfig) -> OptResult:
    """Optimal rates for a one-antenna jammer.

    First assume the optimum lies in the energy-accumulation region and solve
    the stationarity equation in rs; keep it if it verifies, otherwise search
    the balanced boundary in rt.
    """
    if cfg.jammer_antennas != 1:
        raise ValueError("solve_single_antenna needs jammer_antennas == 1")
    c = derive_constants(cfg)
    rho_d, k1, k2 = c.rho_d, c.k1, c.k2

    lo, hi = 1e-6, math.log2(1.0 + rho_d)
    grid = np.geomspace(lo, hi, SCAN_POINTS)
    vals = np.array([case_one_lhs(float(r), rho_d, k2) for r in grid])
    monotone = bool(np.all(np.diff(vals) > 0))
    brackets = sign_change_brackets(lambda r: case_one_lhs(r, rho_d, k2), grid)
    candidates = []
    for a, b in brackets:
        rs = find_root(lambda r: case_one_lhs(r, rho_d, k2), RootSpec(a, b, abs_tol=1e-14))
        xi = xi_of_rs(rs, rho_d, k2)
        rates = RatePair(rs + math.log2(1.0 + xi), rs)
        res = _result(
            rates,
            cfg,
            SolverPath.PROP2_CASE_I,
            residuals={"case_one": case_one_lhs(rs, rho_d, k2), "lhs_monotone": monotone},
            aux=AuxVars(xi=xi),
        )
        candidates.append(res)
    in_d1 = [r for r in candidates if r.term_a < r.term_b and r.region is Region.D1]
    if in_d1:
        return max(in_d1, key=lambda r: r.pi)
    return _solve_case_two(cfg, rho_d, k1, k2, monotone)


def _solve_case_two(cfg, rho_d, k1, k2, case_one_monotone) -> OptResult:
    rt_max = _rt_zeta_positive_limit(rho_d, k1, k2)
    # rs >= 0 on the boundary needs rt >= log2(1 + zeta(rt)); zeta decreases in rt
    rt_min = find_root(
        lambda r: r - math.log2(1.0 + zeta_of_rt(r, rho_d, k1, k2)),
        RootSpec(1e-12, rt_max * (1 - 1e-15), abs_tol=1e-14, monotonicity=Monotonicity.INCREASING),
    )
    span = rt_max - rt_min
    # dense near rt_max, where the boundary optimum tends to sit
    offsets = np.geomspace(span * 1e-12, span, SCAN_POINTS)
    grid = np.unique(np.concatenate(([rt_min], rt_max - offsets[::-1], np.linspace(rt_min, rt_max, SCAN_POINTS))))
    grid = grid[(grid >= rt_min) & (grid < rt_max)]

    def stat(r):
        return case_two_stationarity(r, rho_d, k1, k2)

    points = [rt_min]
    for a, b in sign_change_brackets(stat, grid):
        try:
            points.append(find_root(stat, RootSpec(a, b, abs_tol=1e-14)))
        except BracketError:
            continue
    best_rt = max(points, key=lambda r: boundary_throughput(r, rho_d, k1, k2))
    zeta, zp = _zeta_parts(best_rt, rho_d, k1, k2)
    rs = max(0.0, best_rt - math.log2(1.0 + zeta))
    return _result(
        RatePair(best_rt, rs),
        cfg,
        SolverPath.PROP2_CASE_II,
        iterations=len(points) - 1,
        residuals={"stationarity": stat(best_rt), "case_one_monotone": case_one_monotone},
        aux=AuxVars(zeta=zeta, zeta_prime=zp),
    )


# --- multi-antenna jammer -----------------------------------------------------


def _q(z: float, rho_d: float) -> float:
    """1 / (e^((z-1)/rho_d) - 1), 0 once the exponential overflows."""
    u = (z - 1.0) / rho_d
    return 0.0 if u > 700.0 else 1.0 / math.expm1(u)


def multi_antenna_lhs(z: float, rho_d: float, M: float) -> float:
    """Stationarity function in z = 2^rt on the balanced boundary; decreasing in z."""
    q = _q(z, rho_d)
    return rho_d / z - math.log(z) + math.log1p(M * q) + M * q * (1.0 + q) / (1.0 + M * q)


def multi_antenna_rates(z: float, rho_d: float, M: float) -> tuple[float, float]:
    rt = math.log2(z)
    return rt, rt - math.log2(1.0 + M * _q(z, rho_d))


def solve_multi_antenna(cfg: SystemConfig) -> OptResult:
    if cfg.jammer_antennas < 2:
        raise ValueError("solve_multi_antenna needs jammer_antennas >= 2")
    c = derive_constants(cfg)
    rho_d, M = c.rho_d, c.M

    def f(z):
        return multi_antenna_lhs(z, rho_d, M)

    grid = np.geomspace(1.0 + 1e-9, Z_MAX, SCAN_POINTS)
    brackets = sign_change_brackets(f, grid)
    if not brackets:
        raise SolverError("no sign change of the multi-antenna stationarity function on its bracket")
    lo, hi = brackets[0]
    z = find_root(f, RootSpec(lo, hi, abs_tol=1e-12 * lo, monotonicity=Monotonicity.DECREASING))
    rt, rs = multi_antenna_rates(z, rho_d, M)
    return _result(
        RatePair(rt, max(rs, 0.0)),
        cfg,
        SolverPath.PROP3,
        iterations=len(brackets),
        residuals={"stationarity": f(z), "sign_changes": len(brackets)},
        aux=AuxVars(z=z),
    )


def solve(cfg: SystemConfig) -> OptResult:
    if cfg.jammer_antennas == 1:
        return solve_single_antenna(cfg)
    return solve_multi_antenna(cfg)


# --- asymptotic designs -------------------------------------------------------


def asymptotic_single_antenna(cfg: SystemConfig) -> OptResult:
    """High-SNR design and throughput ceiling for a one-antenna jammer."""
    if cfg.jammer_antennas != 1:
        raise ValueError("asymptotic_single_antenna needs jammer_antennas == 1")
    c = derive_constants(cfg)
    w = lambert_w0(1.0 / (math.e * c.k2))
    rs = (1.0 + w) / LN2
    xi = math.sqrt(c.rho_d * c.k2 * (-math.expm1(-rs * LN2)) / (1.0 + c.k2 * 2.0**rs))
    rates = RatePair(rs + math.log2(1.0 + xi), rs)
    return _result(rates, cfg, SolverPath.COROLLARY1, aux=AuxVars(xi=xi), asymptotic=True, pi_bound=w / LN2)


def asymptotic_multi_antenna_high_snr(cfg: SystemConfig) -> OptResult:
    """High-SNR design for a multi-antenna jammer. ``pi_bound`` is the asymptotic secrecy rate.

    When the asymptotic secrecy rate is negative (low SNR) the returned rates
    use rs = 0 and carry zero throughput; the raw value is in ``residuals``.
    """
    if cfg.jammer_antennas < 2:
        raise ValueError("asymptotic_multi_antenna_high_snr needs jammer_antennas >= 2")
    c = derive_constants(cfg)
    w = lambert_w0(2.0 * c.rho_d)
    rt = math.log2(2.0 * c.rho_d) - math.log2(w)
    rs = 2.0 * w / LN2 - math.log2(c.M * c.rho_d)
    z = 2.0 * c.rho_d / w
    rates = RatePair(rt, min(max(rs, 0.0), rt))
    return _result(
        rates,
        cfg,
        SolverPath.COROLLARY2,
        aux=AuxVars(z=z),
        asymptotic=True,
        pi_bound=rs,
        residuals={"raw_rs": rs, "stationarity": multi_antenna_lhs(z, c.rho_d, c.M)},
    )


def asymptotic_large_nj(cfg: SystemConfig) -> OptResult:
    """Large-array design; ``pi_bound`` does not depend on the antenna count."""
    if cfg.jammer_antennas < 2:
        raise ValueError("asymptotic_large_nj needs jammer_antennas >= 2")
    c = derive_constants(cfg)
    w = lambert_w0(c.rho_d)
    z = math.exp(w)
    rt = w / LN2
    rs = rt - math.log2(1.0 + c.M * _q(z, c.rho_d))
    bound = w / (LN2 * math.exp(1.0 / w - 1.0 / c.rho_d))
    return _result(
        RatePair(rt, min(max(rs, 0.0), rt)),
        cfg,
        SolverPath.COROLLARY3,
        aux=AuxVars(z=z),
        asymptotic=True,
        pi_bound=bound,
        residuals={"raw_rs": rs},
    )


# --- brute-force oracle -------------------------------------------------------


@dataclass(frozen=True)
class GridResult:
    best: OptResult
    step: float
    slack: float  # largest drop to a grid neighbour of the argmax


def grid_oracle(
    cfg: SystemConfig,
    rt_max: float = 40.0,
    rs_max: float = 40.0,
    step: float = 0.01,
    rows_per_chunk: int = 256,
) -> GridResult:
    """Exhaustive maximization of the optimal-jamming throughput over a rate lattice.

    Lattice points are ``i*step``. Ties resolve toward the smaller rt, then the
    smaller rs (row-major first occurrence).
    """
    if step <= 0:
        raise ValueError("step must be positive")
    c = derive_constants(cfg)
    n_t = int(math.floor(rt_max / step + 1e-9)) + 1
    n_s = int(math.floor(rs_max / step + 1e-9)) + 1
    rs = np.arange(n_s) * step
    best_val, best_idx = -1.0, (0, 0)
    for r0 in range(0, n_t, rows_per_chunk):
        rt = (np.arange(r0, min(n_t, r0 + rows_per_chunk)) * step)[:, None]
        pi = analysis.throughput_surface(rt, rs[None, :], cfg, c)
        flat = int(np.argmax(pi))
        val = float(pi.flat[flat])
        if val > best_val:
            best_val = val
            best_idx = (r0 + flat // n_s, flat % n_s)
    i, j = best_idx
    neighbours = [(i + di, j + dj) for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1))]
    nb = [(a, b) for a, b in neighbours if 0 <= a < n_t and 0 <= b < n_s]
    nb_vals = analysis.throughput_surface(
        np.array([a * step for a, _ in nb]), np.array([b * step for _, b in nb]), cfg, c
    )
    slack = float(max(best_val - nb_vals.min(), 0.0)) if nb else 0.0
    rates = RatePair(i * step, j * step)
    best = _result(rates, cfg, SolverPath.GRID_ORACLE, iterations=n_t * n_s)
    return GridResult(best=best, step=step, slack=slack)
