"""Block-level Monte Carlo simulation of the power-transfer / information-transmission protocol.

Every block either transfers power to the jammer (PT) or carries a codeword
under jamming (IT). A block is IT only when the battery holds at least
P_J*T at its start *and* the source-destination link is not in connection
outage. Channels are drawn at the SINR level: unit exponentials for
single-antenna Rayleigh gains and integer-shape gammas for the jammer's
array gain, independently per block.
"""

from __future__ import annotations

import csv
import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis
from .config import RatePair, SystemConfig, derive_constants
from .numerics import make_rng, sample_exponential, sample_gamma_integer_shape

CHUNK = 1 << 16
TRACE_HEADER = ("block", "kind", "battery_j", "harvested_j", "conn_outage", "sec_outage")


class BlockKind(str, enum.Enum):
    DEDICATED_PT = "D"
    OPPORTUNISTIC_PT = "O"
    IT = "I"


_KIND_CODES = (BlockKind.DEDICATED_PT, BlockKind.OPPORTUNISTIC_PT, BlockKind.IT)


@dataclass
class BatteryState:
    energy: float = 0.0
    capacity: float | None = None  # None: infinite

    def __post_init__(self) -> None:
        if self.energy < 0:
            raise ValueError(f"battery energy must be >= 0, got {self.energy!r}")
        if self.capacity is not None and self.energy > self.capacity:
            raise ValueError("battery energy exceeds capacity")


@dataclass(frozen=True)
class BlockOutcome:
    kind: BlockKind
    harvested: float
    connection_outage: bool
    secrecy_outage: bool
    battery_after: float


@dataclass(frozen=True)
class SimParams:
    rates: RatePair
    jamming_power: float
    n_blocks: int
    seed: int = 0
    initial_energy: float = 0.0
    trace_decimation: int = 0  # 0: no trace; k: record every k-th block
    stream: int = 0
    warmup_fraction: float = 0.01

    def __post_init__(self) -> None:
        if self.n_blocks < 1:
            raise ValueError("n_blocks must be >= 1")
        if self.jamming_power < 0:
            raise ValueError("jamming power must be >= 0")
        if self.trace_decimation < 0:
            raise ValueError("trace_decimation must be >= 0")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ValueError("warmup_fraction must lie in [0, 1)")


@dataclass
class SimTrace:
    block: np.ndarray
    kind: np.ndarray  # single-character codes D/O/I
    battery: np.ndarray
    harvested: np.ndarray
    conn_outage: np.ndarray
    sec_outage: np.ndarray

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_HEADER)
            for row in zip(
                self.block.tolist(),
                self.kind.tolist(),
                self.battery.tolist(),
                self.harvested.tolist(),
                self.conn_outage.astype(int).tolist(),
                self.sec_outage.astype(int).tolist(),
            ):
                w.writerow((row[0], row[1], repr(row[2]), repr(row[3]), row[4], row[5]))


@dataclass
class SimSummary:
    """Totals and long-run estimates; rates and probabilities exclude the warm-up blocks."""

    n_blocks: int
    n_warmup: int
    n_it: int
    n_pt: int
    n_dedicated: int
    n_opportunistic: int
    n_secrecy_outage: int
    p_tx: float
    p_co: float
    p_so: float
    se_p_tx: float
    se_p_co: float
    se_p_so: float
    mean_harvested_power: float
    initial_energy: float
    final_energy: float
    total_harvested: float
    total_consumed: float
    total_overflow: float
    max_energy_last_half: float
    mean_energy_last_half: float
    cycle_histogram: Counter = field(default_factory=Counter)

    @property
    def n_counted(self) -> int:
        return self.n_blocks - self.n_warmup


def _transition(energy: float, need: float, capacity: float | None, harvest: float, outage: bool):
    """Block kind code (0=D, 1=O, 2=I), energy afterwards and overflow lost at a full battery."""
    if energy < need or outage:
        kind = 0 if energy < need else 1
        energy += harvest
        if capacity is not None and energy > capacity:
            return kind, capacity, energy - capacity
        return kind, energy, 0.0
    return 2, energy - need, 0.0


class _Channel:
    """Vectorized per-block draws for one (config, rates, jamming power)."""

    def __init__(self, cfg: SystemConfig, rates: RatePair, jamming_power: float):
        c = derive_constants(cfg, jamming_power)
        m = cfg.path_loss_exponent
        self.n = cfg.jammer_antennas
        self.harvest_scale = cfg.conversion_efficiency * cfg.source_power * cfg.block_time / cfg.d_SJ**m
        self.rho_d = c.rho_d
        # jamming-to-noise ratio at the destination (single-antenna jammer only)
        self.jnr_d = jamming_power / (cfg.d_JD**m * cfg.noise_power)
        self.phi = c.phi
        self.theta = math.expm1(rates.rt * analysis.LN2) if rates.rt < 1000 else math.inf
        self.tau = math.expm1(rates.redundancy * analysis.LN2) if rates.redundancy < 1000 else math.inf

    def draw(self, rng: np.random.Generator, size: int):
        harvest = self.harvest_scale * sample_gamma_integer_shape(rng, self.n, size)
        x_sd = sample_exponential(rng, size=size)
        if self.n == 1:
            x_jd = sample_exponential(rng, size=size)
            # gamma_d < theta  <=>  rho_d X < theta (1 + JNR Y)
            conn = self.rho_d * x_sd < self.theta * (1.0 + self.jnr_d * x_jd)
        else:
            conn = self.rho_d * x_sd < self.theta
        x_se = sample_exponential(rng, size=size)
        if self.n == 1:
            jam_e = sample_exponential(rng, size=size)
        else:
            jam_e = sample_gamma_integer_shape(rng, self.n - 1, size) / (self.n - 1)
        # gamma_e > tau  <=>  X_se > tau * phi * (jamming gain); phi = 0 means always in outage
        with np.errstate(invalid="ignore"):
            thresh = self.tau * self.phi * jam_e
        sec = x_se > np.where(np.isnan(thresh), 0.0, thresh)
        return harvest, conn, sec


def step(
    battery: BatteryState,
    cfg: SystemConfig,
    rates: RatePair,
    jamming_power: float,
    rng: np.random.Generator,
) -> BlockOutcome:
    """Advance ``battery`` by one block (mutates it) and report what happened."""
    ch = _Channel(cfg, rates, jamming_power)
    harvest, conn, sec = ch.draw(rng, 1)
    need = jamming_power * cfg.block_time
    kind, energy, _ = _transition(battery.energy, need, battery.capacity, float(harvest[0]), bool(conn[0]))
    battery.energy = energy
    k = _KIND_CODES[kind]
    return BlockOutcome(
        kind=k,
        harvested=float(harvest[0]) if kind != 2 else 0.0,
        connection_outage=bool(conn[0]) if kind != 0 else False,
        secrecy_outage=bool(sec[0]) if kind == 2 else False,
        battery_after=energy,
    )


def run(cfg: SystemConfig, params: SimParams) -> tuple[SimSummary, SimTrace | None]:
    """Simulate ``params.n_blocks`` blocks; deterministic in (cfg, params)."""
    rng = make_rng(params.seed, params.stream)
    ch = _Channel(cfg, params.rates, params.jamming_power)
    need = params.jamming_power * cfg.block_time
    cap = cfg.battery_capacity
    if cap is not None and params.initial_energy > cap:
        raise ValueError("initial energy exceeds battery capacity")
    n = params.n_blocks
    n_warmup = int(n * params.warmup_fraction)
    half = n // 2
    dec = params.trace_decimation

    kinds = np.empty(n, dtype=np.uint8)
    sec_all = np.empty(n, dtype=bool)
    harvested_total = 0.0
    overflow_total = 0.0
    max_last_half = -math.inf
    sum_last_half = 0.0
    trace_rows: list[tuple] = []
    energy = params.initial_energy

    for start in range(0, n, CHUNK):
        size = min(CHUNK, n - start)
        harvest, conn, sec = ch.draw(rng, size)
        sec_all[start : start + size] = sec
        h_list = harvest.tolist()
        c_list = conn.tolist()
        k_chunk = bytearray(size)
        e_chunk = [0.0] * size
        for i in range(size):
            kc, energy, lost = _transition(energy, need, cap, h_list[i], c_list[i])
            k_chunk[i] = kc
            if kc != 2:
                harvested_total += h_list[i]
                overflow_total += lost
            e_chunk[i] = energy
        kinds[start : start + size] = np.frombuffer(bytes(k_chunk), dtype=np.uint8)
        if start + size > half:
            lo = max(0, half - start)
            tail = e_chunk[lo:]
            max_last_half = max(max_last_half, max(tail))
            sum_last_half += math.fsum(tail)
        if dec:
            k_arr = kinds[start : start + size]
            for i in range((-start) % dec, size, dec):
                kc = int(k_arr[i])
                trace_rows.append(
                    (
                        start + i,
                        _KIND_CODES[kc].value,
                        e_chunk[i],
                        h_list[i] if kc != 2 else 0.0,
                        bool(c_list[i]) if kc != 0 else False,
                        bool(sec[i]) if kc == 2 else False,
                    )
                )

    counted = kinds[n_warmup:]
    n_counted = counted.size
    n_it = int(np.count_nonzero(counted == 2))
    n_ded = int(np.count_nonzero(counted == 0))
    n_opp = int(np.count_nonzero(counted == 1))
    n_sec = int(np.count_nonzero(sec_all[n_warmup:][counted == 2]))
    n_pt = n_ded + n_opp

    p_tx = n_it / n_counted if n_counted else math.nan
    tested = n_opp + n_it
    p_co = n_opp / tested if tested else math.nan
    p_so = n_sec / n_it if n_it else math.nan

    summary = SimSummary(
        n_blocks=n,
        n_warmup=n_warmup,
        n_it=n_it,
        n_pt=n_pt,
        n_dedicated=n_ded,
        n_opportunistic=n_opp,
        n_secrecy_outage=n_sec,
        p_tx=p_tx,
        p_co=p_co,
        p_so=p_so,
        se_p_tx=_proportion_se(counted == 2),
        se_p_co=_binomial_se(p_co, tested),
        se_p_so=_binomial_se(p_so, n_it),
        mean_harvested_power=_mean_harvested_power(cfg, kinds, harvested_total),
        initial_energy=params.initial_energy,
        final_energy=energy,
        total_harvested=harvested_total,
        total_consumed=need * int(np.count_nonzero(kinds == 2)),
        total_overflow=overflow_total,
        max_energy_last_half=max_last_half,
        mean_energy_last_half=sum_last_half / (n - half),
        cycle_histogram=cycle_histogram(kinds[n_warmup:]),
    )
    trace = None
    if dec:
        cols = list(zip(*trace_rows)) if trace_rows else [[]] * 6
        trace = SimTrace(
            block=np.asarray(cols[0], dtype=np.int64),
            kind=np.asarray(cols[1], dtype="<U1"),
            battery=np.asarray(cols[2], dtype=float),
            harvested=np.asarray(cols[3], dtype=float),
            conn_outage=np.asarray(cols[4], dtype=bool),
            sec_outage=np.asarray(cols[5], dtype=bool),
        )
    return summary, trace


def _mean_harvested_power(cfg: SystemConfig, kinds: np.ndarray, harvested_total: float) -> float:
    n_pt_all = int(np.count_nonzero(kinds != 2))
    if n_pt_all == 0:
        return math.nan
    return harvested_total / (n_pt_all * cfg.block_time)


def _binomial_se(p: float, n: int) -> float:
    if not n or math.isnan(p):
        return math.nan
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def _proportion_se(indicator: np.ndarray, n_batches: int = 50) -> float:
    """Standard error of the mean of a correlated 0/1 sequence.

    Uses the larger of the i.i.d. binomial value and the non-overlapping
    batch-means estimate, so dependence through the battery state cannot
    make the error bar optimistic.
    """
    n = indicator.size
    if n == 0:
        return math.nan
    p = float(indicator.mean())
    se = _binomial_se(p, n)
    if n >= 20 * n_batches:
        b = n // n_batches
        means = indicator[: b * n_batches].reshape(n_batches, b).mean(axis=1)
        se = max(se, float(means.std(ddof=1)) / math.sqrt(n_batches))
    return se


def cycle_histogram(kinds: np.ndarray) -> Counter:
    """Counts of (X, Y) = (dedicated, opportunistic) PT blocks per completed PT-IT cycle.

    Counting starts after the first IT block: whatever precedes it may be
    the tail of a cycle that began before ``kinds`` was cut.
    """
    it_idx = np.flatnonzero(kinds == 2)
    hist: Counter = Counter()
    if it_idx.size < 2:
        return hist
    ded = np.concatenate(([0], np.cumsum(kinds == 0)))
    opp = np.concatenate(([0], np.cumsum(kinds == 1)))
    starts = it_idx[:-1] + 1
    ends = it_idx[1:]
    xs = ded[ends] - ded[starts]
    ys = opp[ends] - opp[starts]
    hist.update(zip(xs.tolist(), ys.tolist()))
    return hist


def cycle_grammar_ok(kinds: np.ndarray) -> bool:
    """True when no dedicated PT block follows an opportunistic one inside a cycle."""
    k = np.asarray(kinds)
    return not bool(np.any((k[:-1] == 1) & (k[1:] == 0)))


def kinds_to_codes(kinds) -> np.ndarray:
    """Map a D/O/I string array to the 0/1/2 codes used internally."""
    lut = {"D": 0, "O": 1, "I": 2}
    return np.fromiter((lut[k] for k in kinds), dtype=np.uint8)


@dataclass(frozen=True)
class Comparison:
    quantity: str
    simulated: float
    analytic: float
    se: float

    @property
    def z(self) -> float:
        if self.se == 0 or math.isnan(self.se):
            return 0.0 if self.simulated == self.analytic else math.inf
        return (self.simulated - self.analytic) / self.se


@dataclass(frozen=True)
class ValidationRecord:
    summary: SimSummary
    regime: analysis.Regime
    comparisons: tuple[Comparison, ...]

    def within(self, n_se: float = 3.0) -> bool:
        return all(abs(c.z) < n_se for c in self.comparisons)

    def by_name(self, name: str) -> Comparison:
        return next(c for c in self.comparisons if c.quantity == name)


def empirical_vs_analytic(
    cfg: SystemConfig,
    rates: RatePair,
    jamming_power: float,
    n_blocks: int,
    seed: int = 0,
    stream: int = 0,
) -> ValidationRecord:
    """Simulate and compare p_tx, p_co and per-IT-block secrecy outage against closed forms."""
    summary, _ = run(
        cfg,
        SimParams(rates=rates, jamming_power=jamming_power, n_blocks=n_blocks, seed=seed, stream=stream),
    )
    comps = (
        Comparison(
            "p_tx",
            summary.p_tx,
            analysis.transmission_probability(rates, cfg, jamming_power),
            summary.se_p_tx,
        ),
        Comparison("p_co", summary.p_co, analysis.connection_outage(rates, cfg, jamming_power), summary.se_p_co),
        Comparison("p_so", summary.p_so, analysis.secrecy_outage(rates, cfg, jamming_power), summary.se_p_so),
    )
    return ValidationRecord(summary=summary, regime=analysis.classify_regime(rates, cfg, jamming_power), comparisons=comps)


def energy_trend(block: np.ndarray, battery: np.ndarray, n_batches: int = 20, z: float = 2.576):
    """Slope of battery energy over time with a batch-means confidence interval.

    The trace is cut into ``n_batches`` consecutive batches; batch means are
    regressed on batch centres so the (strong) serial correlation of the
    battery process does not shrink the interval. Returns (slope, lo, hi)
    in joules per block.
    """
    block = np.asarray(block, float)
    battery = np.asarray(battery, float)
    size = battery.size // n_batches
    if size < 2:
        raise ValueError("trace too short for the requested number of batches")
    t = block[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    y = battery[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    tc = t - t.mean()
    slope = float(np.dot(tc, y - y.mean()) / np.dot(tc, tc))
    resid = y - y.mean() - slope * tc
    se = math.sqrt(float(np.dot(resid, resid)) / (n_batches - 2) / float(np.dot(tc, tc)))
    return slope, slope - z * se, slope + z * se
