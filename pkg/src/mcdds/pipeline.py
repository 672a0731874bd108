"""End-to-end drug-delivery run: oral dose -> plasma -> BBB -> ECM -> IDRM.

Stage order::

    G1 -> G2 -> G3                         hour grid, model units
    x mg_to_molecules, rate -> releases    seconds grid, molecules per step
    point-source superposition at each r   molecules/um^3
    receiver intensity, Poisson arrivals   receiver window, step Ts
    IDRM charge/release                    same window

The BBB-side trace is read as an entry rate (per hour) into the ECM.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import PipelineConfig
from .ecm import ecm_time_profile, releases_from_rate, superpose_source
from .idrm import EndogenousPulseTrain, IdrmRun, IdrmState, simulate
from .pk_lti import (
    G2Params,
    G3Params,
    cascade_stages,
    g1_impulse_response,
    g2_apply,
    g3_apply,
)
from .quantities import (
    HOUR,
    MODEL_UNITS,
    SECOND,
    TimeGrid,
    TimeSeries,
    make_time_grid,
    resample,
    write_columns,
)
from .rng import derive_seed

FIGURES = ("fig5", "fig6", "fig7", "fig8", "fig_circ")


class NumericError(RuntimeError):
    pass


@dataclass
class PipelineOutput:
    traces: dict  # name -> TimeSeries
    tables: dict = field(default_factory=dict)  # name -> {column: values}
    manifest: dict = field(default_factory=dict)

    def csv_texts(self) -> dict:
        out = {f"{name}.csv": ts.to_csv() for name, ts in self.traces.items()}
        out.update({f"{name}.csv": write_columns(None, cols) for name, cols in self.tables.items()})
        return out


def _check_finite_nonneg(traces: dict):
    for name, ts in traces.items():
        v = ts.values
        if not np.all(np.isfinite(v)):
            raise NumericError(f"non-finite values in {name}")
        if np.any(v < 0):
            raise NumericError(f"negative values in {name} (min {v.min()})")


def pk_grid(cfg: PipelineConfig) -> TimeGrid:
    return make_time_grid(0.0, cfg.grids.horizon_h, cfg.grids.pk_dt_h, HOUR)


def ecm_grid(cfg: PipelineConfig) -> TimeGrid:
    return make_time_grid(0.0, cfg.grids.horizon_h * 3600.0, cfg.grids.ecm_dt_s, SECOND)


def rx_grid(cfg: PipelineConfig) -> TimeGrid:
    t0 = cfg.grids.rx_start_h * 3600.0
    return make_time_grid(t0, t0 + cfg.grids.rx_duration_s, cfg.receiver.Ts, SECOND)


def _mm_tag(r_mm: float) -> str:
    return f"{r_mm:g}mm"


def _pk_stages(cfg: PipelineConfig, grid: TimeGrid):
    if not cfg.regimen.doses:
        zero = TimeSeries(grid, np.zeros(grid.n), MODEL_UNITS)
        return (
            zero.with_values(zero.values, name="plasma"),
            zero.with_values(zero.values, name="circulation"),
            zero.with_values(zero.values, name="bbb"),
        )
    st = cascade_stages(cfg.regimen, cfg.g1, cfg.g2, cfg.g3, grid)
    return st.plasma, st.circulation, st.bbb


def run_idrm_window(cfg: PipelineConfig, ambient: TimeSeries, seed: int) -> IdrmRun:
    grid = rx_grid(cfg)
    local = resample(ambient, grid)
    pulses = EndogenousPulseTrain.periodic(
        grid.t_start, grid.t_end, cfg.pulses.period_s, cfg.pulses.amplitude
    )
    return simulate(
        cfg.idrm, local, pulses, seed, initial=IdrmState.charged(cfg.initial_storage)
    )


def receiver_columns(run: IdrmRun) -> dict:
    return {"t_s": run.intensity.times, "lambda": run.intensity.values, "arrivals": run.arrivals}


def run_pipeline(cfg: PipelineConfig, out_dir=None) -> PipelineOutput:
    """Run every stage; if ``out_dir`` is given, also write CSVs and manifest."""
    plasma, circ, bbb = _pk_stages(cfg, pk_grid(cfg))
    traces = {"plasma": plasma, "circulation": circ, "bbb": bbb}

    egrid = ecm_grid(cfg)
    rate = resample(bbb, egrid)
    releases = releases_from_rate(rate, cfg.mg_to_molecules, per=HOUR)
    ecm_traces = {}
    for r_mm in cfg.distances_mm:
        ecm_traces[r_mm] = superpose_source(releases, cfg.ecm, r_mm * 1000.0)
        traces[f"ecm_r{_mm_tag(r_mm)}"] = ecm_traces[r_mm]

    # the IDRM sits at the first listed distance
    run = run_idrm_window(cfg, ecm_traces[cfg.distances_mm[0]], derive_seed(cfg.seed, 0))
    traces["lambda_rx"] = run.intensity
    traces["idrm_stored"] = run.storage
    traces["idrm_released"] = run.releases
    _check_finite_nonneg(traces)

    tables = {"receiver": receiver_columns(run), "idrm": run.columns()}
    out = PipelineOutput(traces, tables)
    out.manifest = build_manifest(cfg, out.csv_texts())
    if out_dir is not None:
        write_output(out, out_dir)
    return out


def build_manifest(cfg: PipelineConfig, csv_texts: dict) -> dict:
    return {
        "code_version": __version__,
        "generator": cfg.rng,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "warnings": list(cfg.warnings),
        "files": {
            name: hashlib.sha256(text.encode()).hexdigest()
            for name, text in sorted(csv_texts.items())
        },
    }


def write_output(out: PipelineOutput, out_dir) -> Path:
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    for name, text in out.csv_texts().items():
        (d / name).write_text(text)
    (d / "manifest.json").write_text(json.dumps(out.manifest, indent=2, sort_keys=True) + "\n")
    return d


def figure_traces(name: str, cfg: PipelineConfig) -> dict:
    """Named curves for one figure family."""
    grid = pk_grid(cfg)
    if name == "fig5":
        return {"fig5_plasma": g1_impulse_response(cfg.g1, 125.0, grid)}
    if name == "fig_circ":
        plasma = g1_impulse_response(cfg.g1, 125.0, grid)
        return {
            f"fig_circ_a{a:g}": g2_apply(plasma, G2Params(a, cfg.g2.T3))
            for a in cfg.sweeps.a
        }
    if name == "fig6":
        plasma = g1_impulse_response(cfg.g1, 125.0, grid)
        circ = g2_apply(plasma, cfg.g2)
        onset = [cfg.g1.T0 + cfg.g2.T3]
        return {
            f"fig6_beta{b:g}": g3_apply(circ, G3Params(b), onset) for b in cfg.sweeps.beta
        }
    if name == "fig7":
        g = cfg.grids
        egrid = make_time_grid(0.0, g.fig7_horizon_s, g.fig7_dt_s, SECOND)
        return {
            f"fig7_r{_mm_tag(r)}": ecm_time_profile(cfg.ecm, g.fig7_Q, r * 1000.0, egrid)
            for r in cfg.sweeps.r_mm
        }
    if name == "fig8":
        res = run_pipeline(cfg)
        keep = ["plasma", "circulation", "bbb", f"ecm_r{_mm_tag(cfg.distances_mm[0])}", "lambda_rx"]
        return {f"fig8_{k}": res.traces[k] for k in keep}
    raise ValueError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")


def reproduce_figure(name: str, cfg: PipelineConfig, out_dir=None) -> dict:
    """Write one CSV per curve of the figure family; returns the curves."""
    curves = figure_traces(name, cfg)
    _check_finite_nonneg(curves)
    if out_dir is not None:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        texts = {}
        for key, ts in curves.items():
            texts[f"{key}.csv"] = ts.to_csv(d / f"{key}.csv")
        manifest = build_manifest(cfg, texts)
        manifest["figure"] = name
        (d / f"{name}_manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return curves
