"""Lambert W, bracketed root finding and random variates for the simulator."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

_INV_E = math.exp(-1.0)


class DomainError(ValueError):
    pass


class BracketError(ValueError):
    """The supplied bracket does not contain a sign change."""


class ConvergenceError(RuntimeError):
    pass


def lambert_w0(x: float) -> float:
    """Principal branch of the Lambert W function for real ``x >= -1/e``.

    Halley iteration from a log-based asymptotic start (series around the
    branch point for x close to -1/e). Converges in a handful of steps.
    """
    x = float(x)
    if math.isnan(x):
        raise DomainError("lambert_w0 of NaN")
    if x < -_INV_E:
        # allow -1/e itself as computed in floating point
        if x < -_INV_E * (1.0 + 4e-16):
            raise DomainError(f"lambert_w0 is real only for x >= -1/e, got {x!r}")
        return -1.0
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf

    if x < -0.25:
        p = math.sqrt(max(0.0, 2.0 * (math.e * x + 1.0)))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    elif x < 3.0:
        w = math.log1p(x) * (1.0 - 0.3 * math.log1p(x) / (1.0 + math.log1p(x)))
    else:
        lx = math.log(x)
        llx = math.log(lx)
        w = lx - llx + llx / lx

    for _ in range(64):
        if w <= -1.0:
            w = -1.0 + 1e-12
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        if denom == 0.0:
            break
        dw = f / denom
        w -= dw
        if abs(dw) <= 1e-15 * (1.0 + abs(w)):
            break
    return max(w, -1.0)


class Monotonicity(enum.Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class RootSpec:
    lo: float
    hi: float
    abs_tol: float = 1e-12
    max_iter: int = 200
    monotonicity: Monotonicity = Monotonicity.UNKNOWN

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"bracket must satisfy lo < hi, got [{self.lo}, {self.hi}]")


def find_root(f: Callable[[float], float], spec: RootSpec) -> float:
    """Zero of ``f`` inside ``[spec.lo, spec.hi]`` by Brent's method.

    Raises BracketError when f(lo) and f(hi) have the same strict sign,
    ConvergenceError when ``max_iter`` is exhausted.
    """
    flo, fhi = f(spec.lo), f(spec.hi)
    if math.isnan(flo) or math.isnan(fhi):
        raise BracketError(f"f is NaN at a bracket end: f({spec.lo})={flo}, f({spec.hi})={fhi}")
    if flo == 0.0:
        return spec.lo
    if fhi == 0.0:
        return spec.hi
    if flo * fhi > 0:
        raise BracketError(
            f"no sign change on [{spec.lo!r}, {spec.hi!r}]: f(lo)={flo!r}, f(hi)={fhi!r}"
        )
    if spec.monotonicity is Monotonicity.INCREASING and flo > 0:
        raise BracketError("function declared increasing but f(lo) > 0 > f(hi)")
    if spec.monotonicity is Monotonicity.DECREASING and flo < 0:
        raise BracketError("function declared decreasing but f(lo) < 0 < f(hi)")
    try:
        root, info = optimize.brentq(
            f, spec.lo, spec.hi, xtol=spec.abs_tol, maxiter=spec.max_iter, full_output=True, disp=False
        )
    except RuntimeError as exc:  # pragma: no cover - disp=False reports via info
        raise ConvergenceError(str(exc)) from exc
    if not info.converged:
        raise ConvergenceError(
            f"root not converged after {info.iterations} iterations on [{spec.lo}, {spec.hi}]"
        )
    return float(root)


def sign_change_brackets(f: Callable[[float], float], grid: np.ndarray) -> list[tuple[float, float]]:
    """Adjacent grid intervals on which ``f`` changes sign (NaN samples are skipped)."""
    values = np.array([f(float(x)) for x in grid])
    out = []
    for i in range(len(grid) - 1):
        a, b = values[i], values[i + 1]
        if np.isnan(a) or np.isnan(b):
            continue
        if a == 0.0 or a * b < 0:
            out.append((float(grid[i]), float(grid[i + 1])))
    return out


# --- random variates --------------------------------------------------------


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based (Philox) generator; ``(seed, stream)`` fixes the whole sequence."""
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be non-negative")
    ss = np.random.SeedSequence(seed, spawn_key=(stream,))
    return np.random.Generator(np.random.Philox(ss))


def sample_exponential(rng: np.random.Generator, mean: float = 1.0, size=None):
    return mean * rng.standard_exponential(size)


def sample_gamma_integer_shape(rng: np.random.Generator, k: int, size=None):
    """Gamma(k, 1) variates as sums of ``k`` unit exponentials."""
    if k < 1 or int(k) != k:
        raise ValueError(f"shape must be an integer >= 1, got {k!r}")
    k = int(k)
    if size is None:
        return float(rng.standard_exponential(k).sum())
    shape = (size,) if np.isscalar(size) else tuple(size)
    return rng.standard_exponential(shape + (k,)).sum(axis=-1)
