"""JSON run configuration with literature defaults and field-by-field validation."""
from __future__ import annotations

import copy
import json
import math
import warnings
from dataclasses import asdict, dataclass, field

from .ecm import ALPHA_RANGE, EcmParams
from .idrm import RELEASE_LAWS, IdrmConfig
from .pk_lti import DoseEvent, G1Params, G2Params, G3Params, Regimen
from .receiver import ReceiverParams
from .rng import GENERATOR_NAME

AVOGADRO = 6.02214076e23
DOPAMINE_MOLAR_MASS = 153.18  # g/mol
MG_TO_MOLECULES = AVOGADRO / DOPAMINE_MOLAR_MASS / 1000.0

A_SWEEP = (0.25, 0.35, 0.50, 0.60, 0.75)
BETA_SWEEP = (0.5, 0.75, 1.0, 1.25, 1.5)  # 1/h
R_SWEEP_MM = (1.0, 1.2, 1.3, 1.4, 1.5)


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def _pos(v):
    return None if v > 0 else "must be > 0"


def _nonneg(v):
    return None if v >= 0 else "must be >= 0"


def _open_unit(v):
    return None if 0 < v < 1 else "must lie in the open interval (0, 1)"


def _alpha(v):
    return None if 0 < v <= 1 else "must lie in (0, 1]"


def _tort(v):
    return None if v >= 1 else "must be >= 1"


def _pos_int(v):
    return None if v > 0 and float(v).is_integer() else "must be a positive integer"


def _nonneg_int(v):
    return None if v >= 0 and float(v).is_integer() else "must be a nonnegative integer"


# section -> field -> (default, check)
SCHEMA = {
    "g1": {"k": (1418.0, _pos), "T1": (0.0547, _pos), "T2": (0.6073, _pos), "T0": (0.2461, _nonneg)},
    "g2": {"a": (0.5, _open_unit), "T3": (0.2, _nonneg)},
    "g3": {"beta": (1.0, _pos)},
    "ecm": {"D": (15.0, _pos), "alpha": (0.2, _alpha), "lambda_tort": (1.6, _tort)},
    "receiver": {
        "d_Rx": (1.0, _pos),
        "Ts": (0.1, _pos),
        "lambda_noise": (0.0, _nonneg),
        "D": (15.0, _pos),
        "v_norm": (1.0, _pos),
    },
    "idrm": {
        "capacity": (1_000_000, _pos_int),
        "release_quantum": (10_000, _pos_int),
        "detection_threshold": (1e-6, _pos),
        "initial_storage": (0, _nonneg_int),
        "pulse_period_s": (1.0, _pos),
        "pulse_amplitude": (2e-6, _pos),
    },
    "conversion": {"mg_to_molecules": (MG_TO_MOLECULES, _pos)},
    "grids": {
        "pk_dt_h": (1e-3, _pos),
        "horizon_h": (24.0, _pos),
        "ecm_dt_s": (10.0, _pos),
        "rx_start_h": (12.0, _nonneg),
        "rx_duration_s": (600.0, _pos),
        "fig7_dt_s": (1e4, _pos),
        "fig7_horizon_s": (1e7, _pos),
        "fig7_Q": (1.0, _nonneg),
    },
}
STRING_FIELDS = {("idrm", "release_law"): ("quantum", RELEASE_LAWS)}
TOP_LEVEL = {"regimen", "distances_mm", "sweeps", "rng", "seed", "output_dir", *SCHEMA}


@dataclass(frozen=True)
class Grids:
    pk_dt_h: float = 1e-3
    horizon_h: float = 24.0
    ecm_dt_s: float = 10.0
    rx_start_h: float = 12.0
    rx_duration_s: float = 600.0
    fig7_dt_s: float = 1e4
    fig7_horizon_s: float = 1e7
    fig7_Q: float = 1.0


@dataclass(frozen=True)
class Sweeps:
    a: tuple = A_SWEEP
    beta: tuple = BETA_SWEEP
    r_mm: tuple = R_SWEEP_MM


@dataclass(frozen=True)
class PulseSpec:
    period_s: float = 1.0
    amplitude: float = 2e-6


@dataclass(frozen=True)
class PipelineConfig:
    regimen: Regimen = field(default_factory=Regimen.single)
    g1: G1Params = field(default_factory=G1Params)
    g2: G2Params = field(default_factory=G2Params)
    g3: G3Params = field(default_factory=G3Params)
    ecm: EcmParams = field(default_factory=EcmParams)
    distances_mm: tuple = (1.3,)
    sweeps: Sweeps = field(default_factory=Sweeps)
    receiver: ReceiverParams = field(default_factory=ReceiverParams)
    idrm: IdrmConfig = field(default_factory=IdrmConfig)
    initial_storage: int = 0
    pulses: PulseSpec = field(default_factory=PulseSpec)
    mg_to_molecules: float = MG_TO_MOLECULES
    grids: Grids = field(default_factory=Grids)
    rng: str = GENERATOR_NAME
    seed: int = 0
    output_dir: str = "out"
    warnings: tuple = field(default=(), compare=False)

    def to_dict(self) -> dict:
        """JSON-ready form that :func:`validate_config` maps back to this config."""
        return {
            "regimen": [{"time": d.time, "dose": d.dose} for d in self.regimen.doses],
            "g1": asdict(self.g1),
            "g2": asdict(self.g2),
            "g3": asdict(self.g3),
            "ecm": asdict(self.ecm),
            "distances_mm": list(self.distances_mm),
            "sweeps": {k: list(v) for k, v in asdict(self.sweeps).items()},
            "receiver": asdict(self.receiver),
            "idrm": {
                "capacity": self.idrm.capacity,
                "release_quantum": self.idrm.release_quantum,
                "detection_threshold": self.idrm.detection_threshold,
                "release_law": self.idrm.release_law,
                "initial_storage": self.initial_storage,
                "pulse_period_s": self.pulses.period_s,
                "pulse_amplitude": self.pulses.amplitude,
            },
            "conversion": {"mg_to_molecules": self.mg_to_molecules},
            "grids": asdict(self.grids),
            "rng": self.rng,
            "seed": self.seed,
            "output_dir": self.output_dir,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _number_list(raw, path, errors, check=_pos):
    if not isinstance(raw, list) or not raw:
        errors.append(f"{path}: must be a non-empty list of numbers")
        return ()
    out = []
    for i, v in enumerate(raw):
        if not _is_number(v):
            errors.append(f"{path}[{i}]: must be a number, got {v!r}")
            continue
        msg = check(v)
        if msg:
            errors.append(f"{path}[{i}]: {msg}, got {v}")
        out.append(float(v))
    return tuple(out)


def _section(raw: dict, name: str, errors: list) -> dict:
    spec = SCHEMA[name]
    sub = raw.get(name, {})
    if not isinstance(sub, dict):
        errors.append(f"{name}: must be an object")
        sub = {}
    strings = {f: d for (s, f), d in STRING_FIELDS.items() if s == name}
    for key in sub:
        if key not in spec and key not in strings:
            errors.append(f"{name}.{key}: unknown field")
    vals = {}
    for key, (default, check) in spec.items():
        v = sub.get(key, default)
        if not _is_number(v):
            errors.append(f"{name}.{key}: must be a finite number, got {v!r}")
            vals[key] = default
            continue
        msg = check(v)
        if msg:
            errors.append(f"{name}.{key}: {msg}, got {v}")
            vals[key] = default
            continue
        vals[key] = v
    for key, (default, allowed) in strings.items():
        v = sub.get(key, default)
        if v not in allowed:
            errors.append(f"{name}.{key}: must be one of {list(allowed)}, got {v!r}")
            v = default
        vals[key] = v
    return vals


def parse_config(raw: dict) -> PipelineConfig:
    """Build a config from a decoded JSON object; raises :class:`ConfigError`
    listing every violation."""
    if not isinstance(raw, dict):
        raise ConfigError(["config: top level must be a JSON object"])
    if "config" in raw and "files" in raw:  # a run manifest
        raw = raw["config"]
    errors: list[str] = []
    notes: list[str] = []
    for key in raw:
        if key not in TOP_LEVEL:
            errors.append(f"{key}: unknown field")
    s = {name: _section(raw, name, errors) for name in SCHEMA}

    if abs(s["g1"]["T1"] - s["g1"]["T2"]) <= 1e-12:
        errors.append("g1.T2: must differ from g1.T1 (confluent poles unsupported)")
    lo, hi = ALPHA_RANGE
    if not lo <= s["ecm"]["alpha"] <= hi:
        notes.append(f"ecm.alpha={s['ecm']['alpha']} outside physiological range [{lo}, {hi}]")
    if s["idrm"]["release_quantum"] > s["idrm"]["capacity"]:
        errors.append("idrm.release_quantum: must not exceed idrm.capacity")
    if s["idrm"]["initial_storage"] > s["idrm"]["capacity"]:
        errors.append("idrm.initial_storage: must not exceed idrm.capacity")
    g = s["grids"]
    if g["pk_dt_h"] * 2 > g["horizon_h"]:
        errors.append("grids.pk_dt_h: grid needs at least two samples within grids.horizon_h")
    if g["ecm_dt_s"] * 2 > g["horizon_h"] * 3600:
        errors.append("grids.ecm_dt_s: grid needs at least two samples within grids.horizon_h")
    if g["rx_start_h"] * 3600 + g["rx_duration_s"] > g["horizon_h"] * 3600 + 1e-9:
        errors.append("grids.rx_start_h: receiver window must end within grids.horizon_h")
    if s["receiver"]["Ts"] * 2 > g["rx_duration_s"]:
        errors.append("receiver.Ts: receiver window needs at least two sampling periods")

    doses = []
    reg = raw.get("regimen", [{"time": 0.0, "dose": 125.0}])
    if not isinstance(reg, list):
        errors.append("regimen: must be a list of {time, dose} objects")
        reg = []
    for i, d in enumerate(reg):
        if not isinstance(d, dict) or set(d) - {"time", "dose"}:
            errors.append(f"regimen[{i}]: must be an object with fields time, dose")
            continue
        t, q = d.get("time", 0.0), d.get("dose")
        n_err = len(errors)
        if not _is_number(t) or t < 0:
            errors.append(f"regimen[{i}].time: must be a number >= 0, got {t!r}")
        elif t > g["horizon_h"]:
            errors.append(f"regimen[{i}].time: {t} h lies beyond grids.horizon_h")
        if not _is_number(q) or q <= 0:
            errors.append(f"regimen[{i}].dose: must be a number > 0, got {q!r}")
        if len(errors) == n_err:
            doses.append(DoseEvent(float(t), float(q)))
    times = [d.time for d in doses]
    if any(b < a for a, b in zip(times, times[1:])):
        errors.append("regimen: dose times must be non-decreasing")

    distances = _number_list(raw.get("distances_mm", [1.3]), "distances_mm", errors)
    sw = raw.get("sweeps", {})
    if not isinstance(sw, dict):
        errors.append("sweeps: must be an object")
        sw = {}
    for key in sw:
        if key not in ("a", "beta", "r_mm"):
            errors.append(f"sweeps.{key}: unknown field")
    sweeps = Sweeps(
        a=_number_list(sw.get("a", list(A_SWEEP)), "sweeps.a", errors, _open_unit),
        beta=_number_list(sw.get("beta", list(BETA_SWEEP)), "sweeps.beta", errors),
        r_mm=_number_list(sw.get("r_mm", list(R_SWEEP_MM)), "sweeps.r_mm", errors),
    )
    gen = raw.get("rng", GENERATOR_NAME)
    if gen != GENERATOR_NAME:
        errors.append(f"rng: only {GENERATOR_NAME!r} is supported, got {gen!r}")
    seed = raw.get("seed", 0)
    if not (isinstance(seed, int) and not isinstance(seed, bool) and 0 <= seed < 2**64):
        errors.append(f"seed: must be an unsigned 64-bit integer, got {seed!r}")
        seed = 0
    out_dir = raw.get("output_dir", "out")
    if not isinstance(out_dir, str) or not out_dir:
        errors.append("output_dir: must be a non-empty string")
        out_dir = "out"

    if errors:
        raise ConfigError(errors)

    idrm = s["idrm"]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # alpha range already recorded in notes
        ecm = EcmParams(**s["ecm"])
    rx = ReceiverParams(**s["receiver"])
    return PipelineConfig(
        regimen=Regimen(tuple(doses)),
        g1=G1Params(**s["g1"]),
        g2=G2Params(**s["g2"]),
        g3=G3Params(**s["g3"]),
        ecm=ecm,
        distances_mm=distances,
        sweeps=sweeps,
        receiver=rx,
        idrm=IdrmConfig(
            capacity=int(idrm["capacity"]),
            release_quantum=int(idrm["release_quantum"]),
            detection_threshold=idrm["detection_threshold"],
            receiver=rx,
            release_law=idrm["release_law"],
        ),
        initial_storage=int(idrm["initial_storage"]),
        pulses=PulseSpec(idrm["pulse_period_s"], idrm["pulse_amplitude"]),
        mg_to_molecules=s["conversion"]["mg_to_molecules"],
        grids=Grids(**g),
        rng=gen,
        seed=seed,
        output_dir=out_dir,
        warnings=tuple(notes),
    )


def validate_config(text: str) -> PipelineConfig:
    """Parse JSON text, fill defaults, and validate; raises :class:`ConfigError`."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"malformed JSON: {exc}"]) from None
    return parse_config(raw)


def apply_overrides(raw: dict, assignments) -> dict:
    """Apply ``a.b.c=value`` assignments; values are parsed as JSON when possible."""
    raw = copy.deepcopy(raw)
    if "config" in raw and "files" in raw:
        raw = raw["config"]
    for item in assignments:
        if "=" not in item:
            raise ConfigError([f"--set {item!r}: expected key=value"])
        key, text = item.split("=", 1)
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        node = raw
        parts = key.split(".")
        for p in parts[:-1]:
            nxt = node.setdefault(p, {})
            if not isinstance(nxt, dict):
                raise ConfigError([f"--set {key}: {p} is not an object"])
            node = nxt
        node[parts[-1]] = value
    return raw
