"""Stochastic reception at the IDRM charging receptor.

Arrivals in a sampling period are Poisson with a time-varying mean

    lambda_Rx(t) = lambda_noise + sum_{j=1}^{floor(t/Ts)+1} P_obs(t - (j-1) Ts),

where the j-th term carries the concentration sampled at (j-1) Ts and

    P_obs(tau) = V_Rx / (4 pi D tau)^1.5 * c * v_norm,   V_Rx = 4/3 pi d_Rx^3.

``v_norm`` (um^3) turns the concentration into a molecule count so that P_obs
is dimensionless. Terms with zero elapsed time are skipped because the kernel
is singular there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ecm import causal_convolve
from .quantities import PER_SAMPLE, SECOND, TimeGrid, TimeSeries
from .rng import make_rng

# elapsed times below this fraction of Ts count as zero
_ZERO_ELAPSED = 1e-9


@dataclass(frozen=True)
class ReceiverParams:
    d_Rx: float = 1.0  # um
    Ts: float = 0.1  # s
    lambda_noise: float = 0.0  # counts per sample
    D: float = 15.0  # um^2/s
    v_norm: float = 1.0  # um^3

    def __post_init__(self):
        if not self.d_Rx > 0:
            raise ValueError(f"d_Rx must be positive, got {self.d_Rx}")
        if not self.Ts > 0:
            raise ValueError(f"Ts must be positive, got {self.Ts}")
        if not self.lambda_noise >= 0:
            raise ValueError(f"lambda_noise must be nonnegative, got {self.lambda_noise}")
        if not self.D > 0:
            raise ValueError(f"D must be positive, got {self.D}")
        if not self.v_norm > 0:
            raise ValueError(f"v_norm must be positive, got {self.v_norm}")


def receiver_volume(d_Rx: float) -> float:
    if not d_Rx > 0:
        raise ValueError(f"d_Rx must be positive, got {d_Rx}")
    return 4.0 / 3.0 * math.pi * d_Rx**3


def obs_kernel(params: ReceiverParams, elapsed):
    """P_obs per unit concentration; zero where ``elapsed`` <= 0."""
    tau = np.asarray(elapsed, dtype=float)
    out = np.zeros_like(tau)
    on = tau > 0
    out[on] = (
        receiver_volume(params.d_Rx)
        / (4.0 * math.pi * params.D * tau[on]) ** 1.5
        * params.v_norm
    )
    return out


def p_obs(params: ReceiverParams, c_dac: float, t: float) -> float:
    if not t > 0:
        raise ValueError(f"P_obs needs t > 0, got {t}")
    if not c_dac >= 0:
        raise ValueError(f"concentration must be nonnegative, got {c_dac}")
    return c_dac * float(obs_kernel(params, t))


def _samples_at(c_trace: TimeSeries, times: np.ndarray) -> np.ndarray:
    """Concentration at the given times (s), linear between trace samples."""
    g = c_trace.grid
    if g.unit != SECOND:
        raise ValueError("concentration trace must be on a seconds grid")
    pos = (times - g.t_start) / g.dt
    r = np.round(pos)
    exact = np.abs(pos - r) < _ZERO_ELAPSED
    out = np.interp(times, c_trace.times, c_trace.values)
    out[exact] = c_trace.values[r[exact].astype(int)]
    return out


def lambda_rx(params: ReceiverParams, c_trace: TimeSeries, t: float) -> float:
    """Intensity at time ``t`` (s, measured from the trace start)."""
    g = c_trace.grid
    if not 0 <= t <= g.t_end - g.t_start + _ZERO_ELAPSED * g.dt:
        raise ValueError(f"t={t} s lies outside the concentration trace")
    Ts = params.Ts
    n_terms = math.floor(t / Ts + _ZERO_ELAPSED) + 1
    sample_t = np.arange(n_terms) * Ts
    elapsed = t - sample_t
    elapsed[np.abs(elapsed) < _ZERO_ELAPSED * Ts] = 0.0
    c = _samples_at(c_trace, g.t_start + np.minimum(sample_t, g.t_end - g.t_start))
    return params.lambda_noise + float(np.sum(c * obs_kernel(params, elapsed)))


def intensity_trace(params: ReceiverParams, c_trace: TimeSeries) -> TimeSeries:
    """lambda_Rx at every multiple of Ts within the trace, as one convolution."""
    g = c_trace.grid
    span = g.t_end - g.t_start
    n = math.floor(span / params.Ts + _ZERO_ELAPSED) + 1
    if n < 2:
        raise ValueError("trace is shorter than two sampling periods")
    grid = TimeGrid(g.t_start, params.Ts, n, SECOND)
    c = _samples_at(c_trace, grid.times)
    kernel = obs_kernel(params, np.arange(n) * params.Ts)  # kernel[0] = 0 skips tau = 0
    lam = params.lambda_noise + causal_convolve(c, kernel)
    return TimeSeries(grid, lam, PER_SAMPLE, "lambda_rx")


@dataclass
class ReceiverState:
    """Running form of the intensity sum: push one concentration sample per Ts."""

    params: ReceiverParams
    history: list = field(default_factory=list)

    @property
    def index(self) -> int:
        return len(self.history) - 1

    def push(self, c_dac: float) -> float:
        """Record the sample for the current period and return lambda_Rx there."""
        if not c_dac >= 0:
            raise ValueError(f"concentration must be nonnegative, got {c_dac}")
        self.history.append(float(c_dac))
        return self.intensity()

    def intensity(self) -> float:
        if not self.history:
            return self.params.lambda_noise
        c = np.asarray(self.history)
        lags = (self.index - np.arange(c.size)) * self.params.Ts
        return self.params.lambda_noise + float(np.sum(c * obs_kernel(self.params, lags)))


def sample_arrivals(lam: float, rng) -> int:
    """One Poisson(lam) count from ``rng`` (a seed or a generator)."""
    if not lam >= 0:
        raise ValueError(f"intensity must be nonnegative, got {lam}")
    if isinstance(rng, (int, np.integer)):
        rng = make_rng(int(rng))
    return rng.poisson(float(lam))


def sample_arrival_trace(intensity: TimeSeries, seed: int) -> np.ndarray:
    rng = make_rng(seed)
    return np.array([rng.poisson(float(v)) for v in intensity.values], dtype=np.int64)
