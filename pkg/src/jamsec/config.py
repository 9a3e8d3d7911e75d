"""System parameters, unit conversion and derived constants.

Everything inside the package is SI (watts, joules, seconds, meters).
dBm only appears at the boundaries (config files and the CLI).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping


class ConfigError(ValueError):
    """Invalid or unparseable system configuration."""


def dbm_to_watts(p_dbm: float) -> float:
    if not math.isfinite(p_dbm):
        raise ConfigError(f"power in dBm must be finite, got {p_dbm!r}")
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(p_watts: float) -> float:
    if not p_watts > 0:
        raise ConfigError(f"power must be positive to express in dBm, got {p_watts!r}")
    return 10.0 * math.log10(p_watts) + 30.0


@dataclass(frozen=True)
class SystemConfig:
    """Physical and protocol parameters of the source/jammer/destination/eavesdropper link.

    Defaults reproduce the collinear numerical setup (m=3, T=1 ms, eta=0.5,
    sigma_d^2=-100 dBm, eps=0.01) with a 30 dBm source and an 8-antenna jammer.
    ``battery_capacity=None`` means an infinite battery. The eavesdropper is
    noiseless and has a single antenna.
    """

    path_loss_exponent: float = 3.0
    block_time: float = 1e-3
    conversion_efficiency: float = 0.5
    d_SJ: float = 25.0
    d_SD: float = 50.0
    d_JD: float = 25.0
    d_SE: float = 40.0
    d_JE: float = 15.0
    source_power: float = 1.0
    jammer_antennas: int = 8
    noise_power: float = 1e-13
    secrecy_constraint: float = 0.01
    battery_capacity: float | None = None

    def __post_init__(self) -> None:
        positive = {
            "path_loss_exponent": self.path_loss_exponent,
            "block_time": self.block_time,
            "d_SJ": self.d_SJ,
            "d_SD": self.d_SD,
            "d_JD": self.d_JD,
            "d_SE": self.d_SE,
            "d_JE": self.d_JE,
            "source_power": self.source_power,
            "noise_power": self.noise_power,
        }
        for name, value in positive.items():
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be a finite positive number, got {value!r}")
        if not 0.0 < self.conversion_efficiency <= 1.0:
            raise ConfigError(
                f"conversion_efficiency must lie in (0, 1], got {self.conversion_efficiency!r}"
            )
        if not 0.0 < self.secrecy_constraint < 1.0:
            raise ConfigError(
                f"secrecy_constraint must lie in the open interval (0, 1), "
                f"got {self.secrecy_constraint!r}"
            )
        if isinstance(self.jammer_antennas, bool) or int(self.jammer_antennas) != self.jammer_antennas:
            raise ConfigError(f"jammer_antennas must be an integer, got {self.jammer_antennas!r}")
        if self.jammer_antennas < 1:
            raise ConfigError(f"jammer_antennas must be >= 1, got {self.jammer_antennas!r}")
        object.__setattr__(self, "jammer_antennas", int(self.jammer_antennas))
        if self.battery_capacity is not None and not (
            math.isfinite(self.battery_capacity) and self.battery_capacity > 0
        ):
            raise ConfigError(
                "battery_capacity must be a finite positive energy or None (infinite), "
                f"got {self.battery_capacity!r}"
            )

    @property
    def infinite_battery(self) -> bool:
        return self.battery_capacity is None

    def replace(self, **changes: Any) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def with_source_power_dbm(self, p_dbm: float) -> "SystemConfig":
        return self.replace(source_power=dbm_to_watts(p_dbm))

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["battery_capacity"] = "infinite" if self.battery_capacity is None else self.battery_capacity
        return d


@dataclass(frozen=True)
class RatePair:
    """Wiretap code rates in bits per channel use: codeword rate ``rt`` and secrecy rate ``rs``."""

    rt: float
    rs: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.rt) and math.isfinite(self.rs)):
            raise ValueError(f"rates must be finite, got rt={self.rt!r}, rs={self.rs!r}")
        if self.rs < 0:
            raise ValueError(f"secrecy rate must be >= 0, got {self.rs!r}")
        if self.rt < self.rs:
            raise ValueError(f"codeword rate {self.rt!r} is below secrecy rate {self.rs!r}")

    @property
    def redundancy(self) -> float:
        """Rate gap rt - rs spent on confusing the eavesdropper."""
        return self.rt - self.rs


@dataclass(frozen=True)
class DerivedConstants:
    """Constants computed once from a configuration (and a jamming power, for phi/psi).

    rho_d: destination SNR without jamming.
    rho_j: mean harvested energy per power-transfer block [J].
    phi: eavesdropper jamming-to-signal ratio; psi: the same ratio at the destination.
    k1, k2: single-antenna optimization constants.
    M: multi-antenna constant, None when the jammer has one antenna.
    """

    rho_d: float
    rho_j: float
    phi: float
    psi: float
    k1: float
    k2: float
    M: float | None

    @property
    def jamming_cost(self) -> float:
        """Coefficient c such that P_hat_J T / rho_J = c / (2^(rt-rs) - 1)."""
        return self.k1 if self.M is None else self.M


def derive_constants(cfg: SystemConfig, jamming_power: float = 0.0) -> DerivedConstants:
    if not (math.isfinite(jamming_power) and jamming_power >= 0):
        raise ConfigError(f"jamming power must be finite and >= 0, got {jamming_power!r}")
    m = cfg.path_loss_exponent
    eps = cfg.secrecy_constraint
    nj = cfg.jammer_antennas
    loss_sj = cfg.d_SJ**m
    loss_sd = cfg.d_SD**m
    je_over_se = cfg.d_JE**m / cfg.d_SE**m

    rho_d = cfg.source_power / (loss_sd * cfg.noise_power)
    rho_j = cfg.conversion_efficiency * nj * cfg.source_power * cfg.block_time / loss_sj
    phi = jamming_power / cfg.source_power * cfg.d_SE**m / cfg.d_JE**m
    psi = jamming_power / cfg.source_power * loss_sd / cfg.d_JD**m
    k1 = loss_sj / cfg.conversion_efficiency * je_over_se * (1.0 / eps - 1.0)
    k2 = je_over_se * loss_sd / cfg.d_JD**m * (1.0 / eps - 1.0)
    if nj == 1:
        M = None
    else:
        M = (
            loss_sj
            / (nj * cfg.conversion_efficiency)
            * je_over_se
            * (nj - 1)
            * math.expm1(-math.log(eps) / (nj - 1))
        )
    return DerivedConstants(rho_d=rho_d, rho_j=rho_j, phi=phi, psi=psi, k1=k1, k2=k2, M=M)


# --- config files -----------------------------------------------------------

_FIELDS = {f.name: f for f in dataclasses.fields(SystemConfig)}
_POWER_KEYS = ("source_power", "noise_power")


def _parse_value(key: str, raw: str) -> tuple[str, Any]:
    raw = raw.strip()
    for base in _POWER_KEYS:
        if key == f"{base}_dbm":
            return base, dbm_to_watts(_to_float(key, raw))
        if key in (f"{base}_watts", base):
            return base, _to_float(key, raw)
    if key not in _FIELDS:
        raise ConfigError(f"unknown configuration key {key!r}")
    if key == "battery_capacity":
        if raw.lower() in ("infinite", "inf", "none"):
            return key, None
        return key, _to_float(key, raw)
    if key == "jammer_antennas":
        try:
            return key, int(raw)
        except ValueError:
            raise ConfigError(f"jammer_antennas must be an integer, got {raw!r}") from None
    return key, _to_float(key, raw)


def _to_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as a number") from None


def parse_assignments(lines: list[str] | tuple[str, ...], source: str = "<config>") -> dict[str, Any]:
    """Parse ``key = value`` lines (``#`` comments allowed) into SystemConfig keyword arguments."""
    values: dict[str, Any] = {}
    for lineno, line in enumerate(lines, 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, raw = text.split("=", 1)
        name, value = _parse_value(key.strip(), raw)
        values[name] = value
    return values


def load_config(
    path: str | Path | None = None,
    overrides: Mapping[str, str] | list[str] | None = None,
    base: SystemConfig | None = None,
) -> SystemConfig:
    """Build a config from defaults, an optional key-value file, then ``key=value`` overrides."""
    values: dict[str, Any] = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file {p}: {exc}") from exc
        values.update(parse_assignments(text.splitlines(), source=str(p)))
    if overrides:
        items = overrides.items() if isinstance(overrides, Mapping) else _split_overrides(overrides)
        values.update(parse_assignments([f"{k} = {v}" for k, v in items], source="--set"))
    try:
        return dataclasses.replace(base or SystemConfig(), **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _split_overrides(items: list[str]) -> list[tuple[str, str]]:
    out = []
    for item in items:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        k, v = item.split("=", 1)
        out.append((k.strip(), v.strip()))
    return out


def format_config(cfg: SystemConfig) -> str:
    """Serialize to the key-value file format; parses back to an equal config."""
    lines = []
    for name, value in cfg.to_dict().items():
        if name in _POWER_KEYS:
            lines.append(f"{name}_watts = {value!r}")
        else:
            lines.append(f"{name} = {value if isinstance(value, str) else repr(value)}")
    return "\n".join(lines) + "\n"
