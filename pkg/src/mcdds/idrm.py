"""Discrete-event model of an intelligent dopamine rate modulator (IDRM).

Each sampling period the unit (1) absorbs a Poisson number of DAC molecules
through its charging receptor, discarding whatever does not fit in storage,
and (2) if the sensed endogenous dopamine level reaches the detection
threshold, releases part of its store. All counts are Python ints, so
``absorbed_total - released_total == stored - initial`` holds exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .quantities import MOLECULES, SECOND, TimeGrid, TimeSeries
from .receiver import ReceiverParams, ReceiverState, intensity_trace, p_obs
from .rng import make_rng

RELEASE_LAWS = ("quantum", "proportional")


@dataclass(frozen=True)
class IdrmConfig:
    capacity: int = 1_000_000
    release_quantum: int = 10_000
    detection_threshold: float = 1e-6  # molecules/um^3
    receiver: ReceiverParams = field(default_factory=ReceiverParams)
    release_law: str = "quantum"

    def __post_init__(self):
        if int(self.capacity) != self.capacity or self.capacity <= 0:
            raise ValueError(f"capacity must be a positive integer, got {self.capacity}")
        if int(self.release_quantum) != self.release_quantum or not (
            0 < self.release_quantum <= self.capacity
        ):
            raise ValueError(
                f"release_quantum must be an integer in (0, capacity], got {self.release_quantum}"
            )
        if not self.detection_threshold > 0:
            raise ValueError("detection_threshold must be positive")
        if self.release_law not in RELEASE_LAWS:
            raise ValueError(f"release_law must be one of {RELEASE_LAWS}")
        object.__setattr__(self, "capacity", int(self.capacity))
        object.__setattr__(self, "release_quantum", int(self.release_quantum))


@dataclass(frozen=True)
class IdrmState:
    stored: int = 0
    absorbed_total: int = 0
    released_total: int = 0
    overflow_total: int = 0
    initial: int = 0

    def check(self, cfg: IdrmConfig):
        if not 0 <= self.stored <= cfg.capacity:
            raise ValueError(f"stored={self.stored} outside [0, {cfg.capacity}]")
        if min(self.absorbed_total, self.released_total, self.overflow_total) < 0:
            raise ValueError("tallies must be nonnegative")
        if self.absorbed_total - self.released_total != self.stored - self.initial:
            raise ValueError("mass balance violated")

    @classmethod
    def charged(cls, stored: int) -> "IdrmState":
        return cls(stored=stored, initial=stored)


@dataclass(frozen=True)
class EndogenousPulseTrain:
    times: tuple = ()  # s
    amplitudes: tuple = ()  # molecules/um^3

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        amps = tuple(float(a) for a in self.amplitudes)
        if len(times) != len(amps):
            raise ValueError("times and amplitudes differ in length")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("pulse times must be strictly increasing")
        if any(not a > 0 for a in amps):
            raise ValueError("pulse amplitudes must be positive")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def periodic(cls, t_start, t_end, period, amplitude) -> "EndogenousPulseTrain":
        n = math.floor((t_end - t_start) / period + 1e-9) + 1
        times = [t_start + i * period for i in range(n)]
        return cls(tuple(times), (amplitude,) * n)


def detect(endogenous_level: float, theta: float) -> bool:
    return endogenous_level >= theta


def release_amount(cfg: IdrmConfig, stored: int, level: float) -> int:
    if cfg.release_law == "quantum":
        want = cfg.release_quantum
    else:
        want = math.floor(cfg.release_quantum * level / cfg.detection_threshold)
    return min(want, stored)


def _advance(state: IdrmState, cfg: IdrmConfig, arrivals: int, endogenous: float):
    room = cfg.capacity - state.stored
    taken = min(arrivals, room)
    stored = state.stored + taken
    released = 0
    if detect(endogenous, cfg.detection_threshold):
        released = release_amount(cfg, stored, endogenous)
        stored -= released
    new = replace(
        state,
        stored=stored,
        absorbed_total=state.absorbed_total + taken,
        released_total=state.released_total + released,
        overflow_total=state.overflow_total + arrivals - taken,
    )
    return new, released


def step(
    state: IdrmState,
    cfg: IdrmConfig,
    ambient_dac: float,
    endogenous: float,
    t: float,
    rng,
    receiver_state: ReceiverState | None = None,
) -> tuple[IdrmState, int]:
    """Advance one sampling period ending at time ``t`` (s).

    Without ``receiver_state`` the arrival mean is the single most recent
    contribution, ``lambda_noise + P_obs(Ts)``; with it the full intensity
    history is accumulated.
    """
    state.check(cfg)
    if not ambient_dac >= 0 or not endogenous >= 0:
        raise ValueError("concentrations must be nonnegative")
    rx = cfg.receiver
    if receiver_state is not None:
        lam = receiver_state.push(ambient_dac)
    else:
        lam = rx.lambda_noise + p_obs(rx, ambient_dac, rx.Ts)
    arrivals = rng.poisson(lam)
    return _advance(state, cfg, arrivals, endogenous)


@dataclass
class IdrmRun:
    storage: TimeSeries
    releases: TimeSeries
    intensity: TimeSeries
    arrivals: np.ndarray
    absorbed_cum: np.ndarray
    released_cum: np.ndarray
    final: IdrmState

    @property
    def tallies(self) -> tuple[int, int, int]:
        f = self.final
        return f.absorbed_total, f.released_total, f.overflow_total

    def columns(self) -> dict:
        return {
            "t_s": self.storage.times,
            "stored": self.storage.values.astype(np.int64),
            "released_this_step": self.releases.values.astype(np.int64),
            "absorbed_total": self.absorbed_cum,
            "released_total": self.released_cum,
        }


def pulse_indices(pulses: EndogenousPulseTrain, grid: TimeGrid) -> dict[int, float]:
    out = {}
    for t, amp in zip(pulses.times, pulses.amplitudes):
        pos = (t - grid.t_start) / grid.dt
        i = int(round(pos))
        if not 0 <= i < grid.n:
            raise ValueError(f"pulse at t={t} s lies outside the simulated span")
        if i in out:
            raise ValueError(f"two pulses fall in the same sampling period (t={t} s)")
        out[i] = amp
    return out


def simulate(
    cfg: IdrmConfig,
    ambient_trace: TimeSeries,
    pulses: EndogenousPulseTrain,
    seed: int,
    initial: IdrmState | None = None,
    intensity: TimeSeries | None = None,
) -> IdrmRun:
    """Run the IDRM over ``ambient_trace`` sampled every ``cfg.receiver.Ts``.

    The arrival mean at each step is the accumulated receiver intensity of
    the ambient history. A precomputed ``intensity`` trace may be supplied.
    """
    if ambient_trace.grid.unit != SECOND:
        raise ValueError("ambient trace must be on a seconds grid")
    lam_trace = intensity if intensity is not None else intensity_trace(cfg.receiver, ambient_trace)
    grid = lam_trace.grid
    endo = pulse_indices(pulses, grid)
    state = initial if initial is not None else IdrmState()
    state.check(cfg)
    rng = make_rng(seed)

    n = grid.n
    stored = np.empty(n, dtype=np.int64)
    rel = np.zeros(n, dtype=np.int64)
    arr = np.empty(n, dtype=object)
    absorbed_cum = np.empty(n, dtype=object)
    released_cum = np.empty(n, dtype=object)
    lam = lam_trace.values.tolist()
    poisson = rng.poisson
    cap = cfg.capacity
    theta = cfg.detection_threshold
    # same arithmetic as _advance, unrolled onto local ints for speed
    s, absorbed, released, overflow = (
        state.stored, state.absorbed_total, state.released_total, state.overflow_total
    )
    for i in range(n):
        a = poisson(lam[i])
        taken = a if a < cap - s else cap - s
        s += taken
        absorbed += taken
        overflow += a - taken
        level = endo.get(i)
        if level is not None and level >= theta:
            r = release_amount(cfg, s, level)
            s -= r
            released += r
            rel[i] = r
        stored[i] = s
        arr[i] = a
        absorbed_cum[i] = absorbed
        released_cum[i] = released
    state = replace(
        state, stored=s, absorbed_total=absorbed, released_total=released,
        overflow_total=overflow,
    )
    state.check(cfg)
    return IdrmRun(
        storage=TimeSeries(grid, stored.astype(float), MOLECULES, "idrm_stored"),
        releases=TimeSeries(grid, rel.astype(float), MOLECULES, "idrm_released"),
        intensity=lam_trace,
        arrivals=arr,
        absorbed_cum=absorbed_cum,
        released_cum=released_cum,
        final=state,
    )
