"""Closed-form outage, transmission-probability and throughput expressions.

All functions are pure in (config, rates, jamming power). Rates are in
bits per channel use, powers in watts.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .config import DerivedConstants, RatePair, SystemConfig, derive_constants

LN2 = math.log(2.0)
REGION_RTOL = 1e-9


class RegimeTag(str, enum.Enum):
    ENERGY_ACCUMULATION = "EnergyAccumulation"
    ENERGY_BALANCED = "EnergyBalanced"


class Region(str, enum.Enum):
    D1 = "D1"
    D_HAT = "D_hat"
    D2 = "D2"


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    boundary_margin: float  # p_co/(1-p_co) - P_J T / rho_J


@dataclass(frozen=True)
class ThroughputReport:
    pi: float
    p_tx: float
    p_co: float
    p_so: float
    regime: Regime
    term_a: float
    term_b: float
    jamming_power: float
    region: Region


def _exp2m1(x):
    """2**x - 1 without cancellation for small x."""
    return np.expm1(np.multiply(x, LN2))


def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def gamma_d_cdf(x: float, cfg: SystemConfig, jamming_power: float) -> float:
    """CDF of the destination SINR at ``x``."""
    if x < 0:
        raise ValueError(f"SINR threshold must be >= 0, got {x!r}")
    c = derive_constants(cfg, jamming_power)
    tail = _safe_exp(-x / c.rho_d)
    if cfg.jammer_antennas == 1:
        tail /= 1.0 + c.psi * x
    return 1.0 - tail


def outage_odds(rates: RatePair, cfg: SystemConfig, jamming_power: float) -> float:
    """p_co / (1 - p_co), computed directly so it stays accurate when p_co is close to 1."""
    c = derive_constants(cfg, jamming_power)
    theta = float(_exp2m1(rates.rt))
    u = theta / c.rho_d
    if cfg.jammer_antennas == 1:
        return _safe_exp(u) * (1.0 + c.psi * theta) - 1.0
    return math.expm1(u) if u < 700 else math.inf


def connection_outage(rates: RatePair, cfg: SystemConfig, jamming_power: float) -> float:
    theta = float(_exp2m1(rates.rt))
    if math.isinf(theta):
        return 1.0
    return gamma_d_cdf(theta, cfg, jamming_power)


def secrecy_outage(rates: RatePair, cfg: SystemConfig, jamming_power: float) -> float:
    """Probability that the eavesdropper's capacity exceeds the rate redundancy.

    Closed-form tail of the eavesdropper SINR density; 1 when there is no
    redundancy or no jamming (the eavesdropper is noiseless).
    """
    if rates.rt <= rates.rs:
        return 1.0
    phi = derive_constants(cfg, jamming_power).phi
    tau = float(_exp2m1(rates.redundancy))
    n = cfg.jammer_antennas
    if n == 1:
        return 1.0 / (1.0 + phi * tau)
    return ((n - 1) / (phi * tau + n - 1)) ** (n - 1)


def optimal_jamming_power(rates: RatePair, cfg: SystemConfig) -> float:
    """Smallest jamming power meeting the secrecy-outage constraint with equality."""
    if rates.rt <= rates.rs:
        raise ValueError("secrecy rate gap is zero")
    m = cfg.path_loss_exponent
    eps = cfg.secrecy_constraint
    n = cfg.jammer_antennas
    scale = cfg.source_power * cfg.d_JE**m / cfg.d_SE**m / float(_exp2m1(rates.redundancy))
    if n == 1:
        return scale * (1.0 / eps - 1.0)
    return scale * (n - 1) * math.expm1(-math.log(eps) / (n - 1))


def _energy_ratio(cfg: SystemConfig, jamming_power: float) -> float:
    return jamming_power * cfg.block_time / derive_constants(cfg).rho_j


def transmission_probability(rates: RatePair, cfg: SystemConfig, jamming_power: float) -> float:
    """Long-run fraction of information-transmission blocks."""
    odds = outage_odds(rates, cfg, jamming_power)
    if math.isinf(odds):
        return 0.0
    return 1.0 / (1.0 + max(_energy_ratio(cfg, jamming_power), odds))


def classify_regime(rates: RatePair, cfg: SystemConfig, jamming_power: float) -> Regime:
    margin = outage_odds(rates, cfg, jamming_power) - _energy_ratio(cfg, jamming_power)
    tag = RegimeTag.ENERGY_ACCUMULATION if margin > 0 else RegimeTag.ENERGY_BALANCED
    return Regime(tag=tag, boundary_margin=margin)


def throughput_with_power(rates: RatePair, cfg: SystemConfig, jamming_power: float) -> float:
    """p_tx * R_s for an arbitrary jamming power (secrecy constraint not enforced)."""
    return transmission_probability(rates, cfg, jamming_power) * rates.rs


def throughput_terms(rt, rs, cfg: SystemConfig, constants: DerivedConstants | None = None):
    """Terms (a) and (b) of the optimal-jamming throughput, vectorized over rates.

    (a) is P_hat_J T / rho_J and (b) is p_co/(1-p_co) evaluated at P_hat_J.
    Entries with rt <= rs give (a) = inf.
    """
    c = constants or derive_constants(cfg)
    rt = np.asarray(rt, dtype=float)
    rs = np.asarray(rs, dtype=float)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        gap = _exp2m1(rt - rs)
        gap = np.where(gap > 0, gap, 0.0)
        theta = _exp2m1(rt)
        u = theta / c.rho_d
        a = np.where(gap > 0, c.jamming_cost / gap, np.inf)
        if cfg.jammer_antennas == 1:
            b = np.exp(u) * (1.0 + np.where(gap > 0, c.k2 * theta / gap, np.inf)) - 1.0
        else:
            b = np.expm1(u)
    return a, b


def throughput_surface(rt, rs, cfg: SystemConfig, constants: DerivedConstants | None = None):
    """Throughput with optimal jamming power, vectorized; 0 where rt <= rs."""
    rt_b, rs_b = np.broadcast_arrays(np.asarray(rt, float), np.asarray(rs, float))
    a, b = throughput_terms(rt_b, rs_b, cfg, constants)
    with np.errstate(invalid="ignore"):
        pi = rs_b / (1.0 + np.maximum(a, b))
    return np.where((rt_b > rs_b) & np.isfinite(pi), pi, 0.0)


def region_of(term_a: float, term_b: float) -> Region:
    if abs(term_a - term_b) <= REGION_RTOL * max(1.0, term_a, term_b):
        return Region.D_HAT
    return Region.D1 if term_a < term_b else Region.D2


def rate_region(rates: RatePair, cfg: SystemConfig) -> Region:
    a, b = throughput_terms(rates.rt, rates.rs, cfg)
    return region_of(float(a), float(b))


def throughput(rates: RatePair, cfg: SystemConfig) -> ThroughputReport:
    """Throughput at the secrecy-constrained optimal jamming power, with diagnostics."""
    pj = optimal_jamming_power(rates, cfg)
    a, b = throughput_terms(rates.rt, rates.rs, cfg)
    a, b = float(a), float(b)
    worst = max(a, b)
    p_tx = 0.0 if math.isinf(worst) else 1.0 / (1.0 + worst)
    return ThroughputReport(
        pi=p_tx * rates.rs,
        p_tx=p_tx,
        p_co=connection_outage(rates, cfg, pj),
        p_so=secrecy_outage(rates, cfg, pj),
        regime=Regime(
            tag=RegimeTag.ENERGY_ACCUMULATION if b - a > 0 else RegimeTag.ENERGY_BALANCED,
            boundary_margin=b - a,
        ),
        term_a=a,
        term_b=b,
        jamming_power=pj,
        region=region_of(a, b),
    )
