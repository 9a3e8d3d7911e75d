"""Secrecy throughput of a wiretap link protected by a wireless-powered friendly jammer."""

from .config import ConfigError, RatePair, SystemConfig, dbm_to_watts, derive_constants, load_config, watts_to_dbm
from .analysis import Region, RegimeTag, throughput, transmission_probability
from .optimizer import OptResult, SolverError, grid_oracle, solve
from .simulator import SimParams, run

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "RatePair",
    "SystemConfig",
    "dbm_to_watts",
    "watts_to_dbm",
    "derive_constants",
    "load_config",
    "Region",
    "RegimeTag",
    "throughput",
    "transmission_probability",
    "OptResult",
    "SolverError",
    "grid_oracle",
    "solve",
    "SimParams",
    "run",
]
