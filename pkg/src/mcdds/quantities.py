"""Time grids, sampled traces and unit tags shared by every pipeline stage.

The pharmacokinetic chain runs on hour grids with mg amounts; the diffusion
and receiver stages run on second grids with micrometre lengths. Conversions
only happen through :func:`convert_time` and :func:`resample`.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# relative slack used when a float ratio should land on an integer
_GRID_EPS = 1e-9


@dataclass(frozen=True)
class UnitTag:
    """A unit label with its scale relative to the canonical unit of its dimension.

    Canonical units: hours (time), mg (amount), molecules/um^3 (concentration),
    um (length). ``symbol`` is the ASCII form used in CSV headers.
    """

    dimension: str
    symbol: str
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"unit scale must be positive, got {self.scale}")


HOUR = UnitTag("time", "h", 1.0)
MINUTE = UnitTag("time", "min", 1.0 / 60.0)
SECOND = UnitTag("time", "s", 1.0 / 3600.0)
MG = UnitTag("amount", "mg", 1.0)
MODEL_UNITS = UnitTag("amount", "model", 1.0)  # "mg-scaled" plasma axis
MOLECULES = UnitTag("count", "molecules", 1.0)
PER_UM3 = UnitTag("concentration", "molecules_per_um3", 1.0)
PER_SAMPLE = UnitTag("intensity", "counts_per_sample", 1.0)
UM = UnitTag("length", "um", 1.0)
MM = UnitTag("length", "mm", 1000.0)

TIME_UNITS = {u.symbol: u for u in (HOUR, MINUTE, SECOND)}


def convert_time(value: float, from_unit: UnitTag, to_unit: UnitTag) -> float:
    """Convert a time value, e.g. ``convert_time(1, HOUR, SECOND) == 3600``."""
    if from_unit.dimension != "time" or to_unit.dimension != "time":
        raise ValueError(
            f"dimension mismatch: {from_unit.dimension} -> {to_unit.dimension}"
        )
    if from_unit == to_unit:
        return value
    return value * from_unit.scale / to_unit.scale


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    dt: float
    n: int
    unit: UnitTag = HOUR

    def __post_init__(self):
        if self.unit.dimension != "time":
            raise ValueError("grid unit must be a time unit")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not math.isfinite(self.t_start):
            raise ValueError("t_start must be finite")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"grid needs at least 2 samples, got n={self.n}")

    @property
    def times(self) -> np.ndarray:
        # t_start + i*dt, never a running sum
        return self.t_start + np.arange(self.n) * self.dt

    @property
    def t_end(self) -> float:
        return self.t_start + (self.n - 1) * self.dt

    def time_of(self, i: int) -> float:
        return self.t_start + i * self.dt

    def to_unit(self, unit: UnitTag) -> "TimeGrid":
        """Same sample instants expressed in another time unit."""
        if unit == self.unit:
            return self
        return TimeGrid(
            convert_time(self.t_start, self.unit, unit),
            convert_time(self.dt, self.unit, unit),
            self.n,
            unit,
        )


def make_time_grid(
    t_start: float, t_end: float, dt: float, unit: UnitTag = HOUR
) -> TimeGrid:
    """Uniform grid from ``t_start`` with ``floor((t_end - t_start)/dt) + 1`` samples."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not t_end > t_start:
        raise ValueError(f"t_end ({t_end}) must exceed t_start ({t_start})")
    n = math.floor((t_end - t_start) / dt + _GRID_EPS) + 1
    return TimeGrid(float(t_start), float(dt), n, unit)


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled scalar trace; immutable, finite-valued."""

    grid: TimeGrid
    values: np.ndarray
    unit: UnitTag = MODEL_UNITS
    name: str = field(default="", compare=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1 or vals.size != self.grid.n:
            raise ValueError(
                f"expected {self.grid.n} values, got shape {np.shape(self.values)}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("TimeSeries values must be finite (NaN/Inf rejected)")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    def __len__(self):
        return self.grid.n

    def with_values(self, values, unit: UnitTag | None = None, name: str | None = None):
        return TimeSeries(
            self.grid,
            values,
            self.unit if unit is None else unit,
            self.name if name is None else name,
        )

    def scaled(self, c: float) -> "TimeSeries":
        return self.with_values(c * self.values)

    def peak(self) -> tuple[float, float]:
        """(time, value) of the maximum sample."""
        i = int(np.argmax(self.values))
        return self.grid.time_of(i), float(self.values[i])

    def integral(self) -> float:
        """Trapezoidal integral over the grid, in value-unit x grid-time-unit."""
        v = self.values
        return float(self.grid.dt * (v.sum() - 0.5 * (v[0] + v[-1])))

    def to_csv(self, path=None) -> str:
        """Write ``t_<unit>,value_<unit>`` CSV with 17 significant digits."""
        return write_columns(
            path,
            {
                f"t_{self.grid.unit.symbol}": self.times,
                f"value_{self.unit.symbol}": self.values,
            },
        )

    @classmethod
    def from_csv(cls, path) -> "TimeSeries":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = [(float(a), float(b)) for a, b in reader]
        t_unit = TIME_UNITS[header[0].removeprefix("t_")]
        v_sym = header[1].removeprefix("value_")
        v_unit = next(
            (u for u in _ALL_UNITS if u.symbol == v_sym), UnitTag("amount", v_sym)
        )
        t = np.array([r[0] for r in rows])
        dt = (t[-1] - t[0]) / (len(t) - 1)
        grid = TimeGrid(t[0], dt, len(t), t_unit)
        return cls(grid, [r[1] for r in rows], v_unit)


_ALL_UNITS = (HOUR, MINUTE, SECOND, MG, MODEL_UNITS, MOLECULES, PER_UM3, PER_SAMPLE, UM, MM)


def fmt(x) -> str:
    """Shortest text for ints, 17 significant digits for floats."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_columns(path, columns: dict) -> str:
    """Write equal-length columns to CSV (``path`` may be None); returns the text."""
    names = list(columns)
    cols = [columns[k] for k in names]
    n = len(cols[0])
    if any(len(c) != n for c in cols):
        raise ValueError("columns must have equal length")
    buf = io.StringIO()
    buf.write(",".join(names) + "\n")
    for row in zip(*cols):
        buf.write(",".join(fmt(v) for v in row) + "\n")
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def resample(series: TimeSeries, target: TimeGrid) -> TimeSeries:
    """Linearly interpolate ``series`` onto ``target`` (any time unit).

    Coincident sample times reproduce the source values exactly.
    """
    if target == series.grid:
        return series
    src = series.grid.to_unit(target.unit)
    tol = _GRID_EPS * max(abs(src.dt), abs(src.t_start), abs(src.t_end))
    if target.t_start < src.t_start - tol or target.t_end > src.t_end + tol:
        raise ValueError(
            f"target [{target.t_start}, {target.t_end}] {target.unit.symbol} lies "
            f"outside source span [{src.t_start}, {src.t_end}]"
        )
    # fractional index avoids re-deriving knot times in the new unit
    pos = (target.times - src.t_start) / src.dt
    pos = np.clip(pos, 0.0, src.n - 1)
    i0 = np.floor(pos).astype(int)
    i0 = np.minimum(i0, src.n - 2)
    frac = pos - i0
    v = series.values
    out = v[i0] + frac * (v[i0 + 1] - v[i0])
    exact = np.abs(frac - np.round(frac)) < _GRID_EPS
    out[exact] = v[(i0 + np.round(frac).astype(int))[exact]]
    return TimeSeries(target, out, series.unit, series.name)
