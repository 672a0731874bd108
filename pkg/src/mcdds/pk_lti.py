"""Linear pharmacokinetic chain: plasma response, circulation delay, BBB crossing.

Stage transfer functions (s in 1/h)::

    G1(s) = k exp(-T0 s) / ((1 + s T1)(1 + s T2))     plasma, per oral dose
    G2(s) = a exp(-T3 s)                               gut -> BBB circulation
    G3(s) = beta / (s + beta)                          first-order BBB passage

Each dose enters as an impulse of weight ``dose / REFERENCE_DOSE_MG``, so the
fitted Levodopa parameters reproduce the 125 mg curve at unit weight.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quantities import HOUR, MODEL_UNITS, TimeGrid, TimeSeries

REFERENCE_DOSE_MG = 125.0

# poles closer than this are treated as coincident
POLE_TOL = 1e-12


@dataclass(frozen=True)
class G1Params:
    k: float = 1418.0
    T1: float = 0.0547
    T2: float = 0.6073
    T0: float = 0.2461

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"k must be positive, got {self.k}")
        if not (self.T1 > 0 and self.T2 > 0):
            raise ValueError(f"time constants must be positive, got {self.T1}, {self.T2}")
        if not self.T0 >= 0:
            raise ValueError(f"T0 must be nonnegative, got {self.T0}")
        if abs(self.T1 - self.T2) <= POLE_TOL:
            raise ValueError(
                "confluent poles T1 == T2 are not supported; perturb one time constant"
            )


@dataclass(frozen=True)
class G2Params:
    a: float = 0.5
    T3: float = 0.2

    def __post_init__(self):
        if not 0 < self.a < 1:
            raise ValueError(f"attenuation a must lie in (0, 1), got {self.a}")
        if not self.T3 >= 0:
            raise ValueError(f"T3 must be nonnegative, got {self.T3}")


@dataclass(frozen=True)
class G3Params:
    beta: float = 1.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")


@dataclass(frozen=True)
class DoseEvent:
    time: float
    dose: float

    def __post_init__(self):
        if not self.dose > 0:
            raise ValueError(f"dose must be positive, got {self.dose}")
        if not self.time >= 0:
            raise ValueError(f"dose time must be nonnegative, got {self.time}")


@dataclass(frozen=True)
class Regimen:
    doses: tuple[DoseEvent, ...] = ()

    def __post_init__(self):
        doses = tuple(self.doses)
        times = [d.time for d in doses]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError("dose times must be non-decreasing")
        object.__setattr__(self, "doses", doses)

    @classmethod
    def single(cls, dose: float = REFERENCE_DOSE_MG, time: float = 0.0) -> "Regimen":
        return cls((DoseEvent(time, dose),))

    def scaled(self, c: float) -> "Regimen":
        return Regimen(tuple(DoseEvent(d.time, c * d.dose) for d in self.doses))


def impulse_weight(dose: float) -> float:
    return dose / REFERENCE_DOSE_MG


def _require_hours(grid: TimeGrid):
    if grid.unit != HOUR:
        raise ValueError(f"pharmacokinetic stages need an hour grid, got {grid.unit.symbol}")


def g1_closed_form(p: G1Params, dose: float, t) -> np.ndarray:
    """Delayed two-exponential response, evaluated pointwise (t in hours)."""
    t = np.asarray(t, dtype=float)
    tau = t - p.T0
    out = np.zeros_like(tau)
    on = tau > 0
    x = tau[on]
    out[on] = (np.exp(-x / p.T1) - np.exp(-x / p.T2)) / (p.T1 - p.T2)
    return impulse_weight(dose) * p.k * out


def g1_peak_time(p: G1Params) -> float:
    """Stationary point of the two-exponential difference."""
    return p.T0 + p.T1 * p.T2 / (p.T2 - p.T1) * np.log(p.T2 / p.T1)


def g1_impulse_response(p: G1Params, dose: float, grid: TimeGrid) -> TimeSeries:
    _require_hours(grid)
    if not dose > 0:
        raise ValueError(f"dose must be positive, got {dose}")
    return TimeSeries(grid, g1_closed_form(p, dose, grid.times), MODEL_UNITS, "plasma")


def delay(series: TimeSeries, shift: float) -> TimeSeries:
    """Shift a trace later by ``shift`` (grid time units); zero before the shift.

    Whole-sample shifts move indices; fractional ones interpolate linearly.
    """
    grid = series.grid
    v = series.values
    s = shift / grid.dt
    m = int(round(s))
    out = np.zeros(grid.n)
    if abs(s - m) <= 1e-9 * max(1.0, abs(s)):
        if m < grid.n:
            out[m:] = v[: grid.n - m]
        return series.with_values(out)
    m = int(np.floor(s))
    frac = s - m
    # out[i] = (1-frac) v[i-m] + frac v[i-m-1]
    padded = np.concatenate([np.zeros(m + 1), v])[: grid.n + m + 1]
    lo = padded[1 : grid.n + 1]  # v[i-m]
    hi = padded[0 : grid.n]  # v[i-m-1]
    out = (1.0 - frac) * lo + frac * hi
    out[: m + 1] = 0.0  # t_i < t_start + shift for i <= m
    return series.with_values(out)


def g2_apply(series: TimeSeries, p: G2Params) -> TimeSeries:
    _require_hours(series.grid)
    shifted = delay(series, p.T3) if p.T3 > 0 else series
    return shifted.with_values(p.a * shifted.values, name="circulation")


def g3_impulse_kernel(p: G3Params, grid: TimeGrid) -> TimeSeries:
    _require_hours(grid)
    if grid.t_start != 0:
        raise ValueError("kernel grid must start at t = 0")
    return TimeSeries(grid, p.beta * np.exp(-p.beta * grid.times), MODEL_UNITS, "g3_kernel")


def convolve(
    f: TimeSeries, g: TimeSeries, rule: str = "rectangle", onsets=()
) -> TimeSeries:
    """Causal convolution ``(f*g)(t) = int_0^t f(u) g(t-u) du`` on f's grid.

    ``rule="rectangle"`` is the plain discrete convolution times dt, for which
    a single sample of height 1/dt at t=0 is the identity element.
    ``rule="trapezoid"`` halves the two end terms of each sum, giving
    second-order accuracy for continuous signals.

    ``onsets`` lists times (trapezoid rule only) at which ``f`` leaves zero
    continuously between two samples; the straddling cell is integrated from
    the onset instead of from the previous sample, which removes the
    grid-phase dependence of the error.
    """
    if not np.isclose(f.grid.dt, g.grid.dt, rtol=1e-12, atol=0) or f.grid.unit != g.grid.unit:
        raise ValueError(f"mismatched grids: dt {f.grid.dt} vs {g.grid.dt}")
    if rule not in ("rectangle", "trapezoid"):
        raise ValueError(f"unknown rule {rule!r}")
    n = f.grid.n
    dt = f.grid.dt
    fv, gv = f.values, g.values
    m = min(n, gv.size)
    gpad = np.zeros(n)
    gpad[:m] = gv[:m]
    full = np.convolve(fv, gpad)[:n]
    if rule == "trapezoid":
        # exact end terms f[0] g[i] and f[i] g[0]
        full = full - 0.5 * (fv[0] * gpad + fv * gv[0])
        for t_on in onsets:
            pos = (t_on - f.grid.t_start) / dt
            j = int(np.floor(pos))
            theta = pos - j
            if j < 0 or j + 1 >= n or theta <= 1e-12 or fv[j] != 0.0:
                continue
            # cell [t_j, t_j+1]: trapezoid used f[j+1] g(t - t_j+1) dt / 2,
            # the onset-aware area is f[j+1] g(t - t_j+1) (1 - theta) dt / 2
            corr = np.zeros(n)
            corr[j + 1 :] = fv[j + 1] * gpad[: n - j - 1]
            # the i = j+1 row is the end term f[i] g[0], already halved
            full = full - 0.5 * theta * corr
    return f.with_values(dt * full)


def g3_apply(series: TimeSeries, p: G3Params, onsets=()) -> TimeSeries:
    """Filter an hour trace starting at 0 through the BBB stage."""
    _require_hours(series.grid)
    kernel = g3_impulse_kernel(p, TimeGrid(0.0, series.grid.dt, series.grid.n, HOUR))
    out = convolve(series, kernel, rule="trapezoid", onsets=onsets)
    return out.with_values(out.values, name="bbb")


def plasma_trace(regimen: Regimen, g1: G1Params, grid: TimeGrid) -> TimeSeries:
    """Superposed G1 responses of every dose in the regimen."""
    _require_hours(grid)
    t = grid.times
    total = np.zeros(grid.n)
    for d in regimen.doses:
        if d.time < grid.t_start or d.time > grid.t_end:
            raise ValueError(f"dose at {d.time} h lies outside the grid span")
        total += g1_closed_form(g1, d.dose, t - d.time)
    return TimeSeries(grid, total, MODEL_UNITS, "plasma")


@dataclass(frozen=True)
class CascadeStages:
    plasma: TimeSeries
    circulation: TimeSeries
    bbb: TimeSeries


def cascade_stages(
    regimen: Regimen, g1: G1Params, g2: G2Params, g3: G3Params, grid: TimeGrid
) -> CascadeStages:
    if grid.t_start != 0:
        raise ValueError("cascade grid must start at t = 0")
    plasma = plasma_trace(regimen, g1, grid)
    circ = g2_apply(plasma, g2)
    # BBB stage dose by dose, so each onset kink gets its own cell correction
    bbb = np.zeros(grid.n)
    for d in regimen.doses:
        one = g2_apply(plasma_trace(Regimen((d,)), g1, grid), g2)
        bbb += g3_apply(one, g3, [d.time + g1.T0 + g2.T3]).values
    return CascadeStages(plasma, circ, TimeSeries(grid, bbb, MODEL_UNITS, "bbb"))


def cascade_response(
    regimen: Regimen, g1: G1Params, g2: G2Params, g3: G3Params, grid: TimeGrid
) -> TimeSeries:
    """DAC amount just past the BBB for a dosing regimen (linear superposition)."""
    return cascade_stages(regimen, g1, g2, g3, grid).bbb


def analytic_cascade_impulse(
    g1: G1Params, g2: G2Params, g3: G3Params, t, dose: float = REFERENCE_DOSE_MG
):
    """Closed-form impulse response of G1*G2*G3 at time(s) ``t`` in hours.

    With poles p1 = 1/T1, p2 = 1/T2, p3 = beta the product is

        C / ((s + p1)(s + p2)(s + p3)),   C = w k a beta / (T1 T2),

    delayed by T0 + T3. Partial fractions give residue
    r_i = C / prod_{j != i} (p_j - p_i) on exp(-p_i tau), tau = t - T0 - T3.
    """
    poles = np.array([1.0 / g1.T1, 1.0 / g1.T2, g3.beta])
    for i in range(3):
        for j in range(i + 1, 3):
            if abs(poles[i] - poles[j]) <= 1e-9 * max(poles[i], poles[j]):
                raise ValueError(f"coincident poles {poles[i]} and {poles[j]}")
    c = impulse_weight(dose) * g1.k * g2.a * g3.beta / (g1.T1 * g1.T2)
    tau = np.asarray(t, dtype=float) - g1.T0 - g2.T3
    out = np.zeros_like(tau)
    on = tau > 0
    for i in range(3):
        others = [poles[j] for j in range(3) if j != i]
        r = c / ((others[0] - poles[i]) * (others[1] - poles[i]))
        out[on] += r * np.exp(-poles[i] * tau[on])
    return out if out.ndim else float(out)
