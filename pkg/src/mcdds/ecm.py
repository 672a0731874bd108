"""DAC transport through the brain extracellular matrix (ECM).

Point-source solution with tortuosity ``lam`` and volume fraction ``alpha``::

    c(r, t) = Q lam^2 / (4 pi D alpha r) * erfc(r lam / (2 sqrt(D t)))

Lengths are micrometres, times seconds, ``Q`` molecules, so ``c`` comes out in
molecules/um^3. There is no clearance term: ``c`` saturates at
``Q lam^2 / (4 pi D alpha r)`` instead of decaying, so long-time values
overstate what tissue with uptake would show.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .quantities import (
    HOUR,
    MOLECULES,
    PER_UM3,
    SECOND,
    TimeGrid,
    TimeSeries,
    UnitTag,
    convert_time,
)
from .special import erfc

ALPHA_RANGE = (0.1, 0.3)

# direct convolution below this length, FFT above
_DIRECT_MAX = 1 << 15
_FLUSH = 1e-250


@dataclass(frozen=True)
class EcmParams:
    D: float = 15.0  # free diffusion coefficient, um^2/s
    alpha: float = 0.2
    lambda_tort: float = 1.6

    def __post_init__(self):
        if not self.D > 0:
            raise ValueError(f"D must be positive, got {self.D}")
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.lambda_tort >= 1:
            raise ValueError(f"tortuosity must be >= 1, got {self.lambda_tort}")
        lo, hi = ALPHA_RANGE
        if not lo <= self.alpha <= hi:
            # soft bound: accepted, but flagged
            warnings.warn(
                f"alpha={self.alpha} outside physiological range [{lo}, {hi}]",
                stacklevel=3,
            )

    @property
    def D_effective(self) -> float:
        return self.D / self.lambda_tort**2


@dataclass(frozen=True)
class EcmQuery:
    Q: float
    r: float
    t: float

    def __post_init__(self):
        if not self.Q >= 0:
            raise ValueError(f"Q must be nonnegative, got {self.Q}")
        if not self.r > 0:
            raise ValueError(f"r must be positive (point source is singular), got {self.r}")
        if not self.t >= 0:
            raise ValueError(f"t must be nonnegative, got {self.t}")


def volume_fraction(v_ecm: float, v_tissue: float) -> float:
    """ECM volume over total tissue volume."""
    if not (v_ecm > 0 and v_tissue > 0):
        raise ValueError("volumes must be positive")
    if v_ecm > v_tissue:
        raise ValueError(f"ECM volume {v_ecm} exceeds tissue volume {v_tissue}")
    return v_ecm / v_tissue


def tortuosity(D: float, D_star: float) -> float:
    if not (D > 0 and D_star > 0):
        raise ValueError("diffusion coefficients must be positive")
    if D_star > D:
        raise ValueError(f"effective diffusivity {D_star} exceeds free diffusivity {D}")
    return math.sqrt(D / D_star)


def steady_state(p: EcmParams, Q: float, r: float) -> float:
    """Long-time limit Q lam^2 / (4 pi D alpha r)."""
    return Q * p.lambda_tort**2 / (4.0 * math.pi * p.D * p.alpha * r)


def unit_kernel(p: EcmParams, r: float, t) -> np.ndarray:
    """Concentration per molecule released at t = 0, evaluated at times ``t`` >= 0."""
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("negative elapsed time")
    out = np.zeros_like(t)
    on = t > 0
    out[on] = erfc(r * p.lambda_tort / (2.0 * np.sqrt(p.D * t[on])))
    # flush the far front: products with it land in subnormals, where
    # scaling stops being exact
    out[out < _FLUSH] = 0.0
    return steady_state(p, 1.0, r) * out


def ecm_concentration(p: EcmParams, q: EcmQuery) -> float:
    return q.Q * float(unit_kernel(p, q.r, q.t))


def _require_seconds(grid: TimeGrid):
    if grid.unit != SECOND:
        raise ValueError(f"diffusion stages need a seconds grid, got {grid.unit.symbol}")


def ecm_time_profile(p: EcmParams, Q: float, r: float, grid: TimeGrid) -> TimeSeries:
    """Concentration at distance ``r`` (um) after an instantaneous release of Q at t = 0."""
    _require_seconds(grid)
    if not Q >= 0:
        raise ValueError(f"Q must be nonnegative, got {Q}")
    return TimeSeries(grid, Q * unit_kernel(p, r, grid.times), PER_UM3, f"ecm_r{r:g}um")


def causal_convolve(x: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """``y[n] = sum_{j<=n} x[j] kernel[n-j]`` for nonnegative inputs.

    FFT round-off can leave tiny negative values where the exact result is 0;
    those are clipped since both operands are nonnegative.
    """
    n = x.size
    if n <= _DIRECT_MAX:
        return np.convolve(x, kernel[:n])[:n]
    y = fftconvolve(x, kernel[:n])[:n]
    return np.maximum(y, 0.0)


def superpose_source(source: TimeSeries, p: EcmParams, r: float) -> TimeSeries:
    """Concentration at ``r`` from a train of releases.

    ``source.values[j]`` is the number of molecules released during step j,
    treated as an instantaneous release at ``t_j``; the response is the sum of
    shifted point-source profiles.
    """
    _require_seconds(source.grid)
    q = source.values
    if np.any(q < 0):
        raise ValueError("source releases must be nonnegative")
    lags = np.arange(source.grid.n) * source.grid.dt
    kernel = unit_kernel(p, r, lags)
    c = causal_convolve(q, kernel)
    return TimeSeries(source.grid, c, PER_UM3, f"ecm_r{r:g}um")


def releases_from_rate(
    rate: TimeSeries, scale: float = 1.0, per: UnitTag = HOUR
) -> TimeSeries:
    """Per-step release amounts ``scale * rate * dt`` from a rate given per ``per``."""
    dt = convert_time(rate.grid.dt, rate.grid.unit, per)
    return rate.with_values(scale * rate.values * dt, unit=MOLECULES)
