import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcdds.config import (
    MG_TO_MOLECULES,
    ConfigError,
    PipelineConfig,
    apply_overrides,
    parse_config,
    validate_config,
)


def test_empty_object_is_table1_default():
    cfg = validate_config("{}")
    assert (cfg.g1.k, cfg.g1.T1, cfg.g1.T2, cfg.g1.T0) == (1418.0, 0.0547, 0.6073, 0.2461)
    assert (cfg.g2.a, cfg.g2.T3, cfg.g3.beta) == (0.5, 0.2, 1.0)
    assert (cfg.ecm.D, cfg.ecm.alpha, cfg.ecm.lambda_tort) == (15.0, 0.2, 1.6)
    assert cfg.distances_mm == (1.3,)
    assert cfg.warnings == ()


def test_mg_to_molecules_default():
    # Avogadro / 153.18 g/mol, per mg
    assert MG_TO_MOLECULES == pytest.approx(6.02214076e23 / 153.18 / 1000, rel=1e-15)
    assert MG_TO_MOLECULES == pytest.approx(3.93e18, rel=1e-3)


def test_bad_a_names_field():
    with pytest.raises(ConfigError) as exc:
        validate_config('{"g2": {"a": 1.5}}')
    assert any(e.startswith("g2.a") and "(0, 1)" in e for e in exc.value.errors)


def test_alpha_soft_bound():
    cfg = validate_config('{"ecm": {"alpha": 0.05}}')
    assert cfg.ecm.alpha == 0.05
    assert any("alpha" in w for w in cfg.warnings)


def test_reports_every_violation():
    raw = {
        "g1": {"k": -1, "T1": "x"},
        "ecm": {"D": 0},
        "receiver": {"Ts": -0.1},
        "idrm": {"capacity": 10, "release_quantum": 20},
        "regimen": [{"time": -1, "dose": 0}],
        "seed": -3,
        "bogus": 1,
    }
    with pytest.raises(ConfigError) as exc:
        parse_config(raw)
    paths = {e.split(":")[0] for e in exc.value.errors}
    for p in ("g1.k", "g1.T1", "ecm.D", "receiver.Ts", "idrm.release_quantum",
              "regimen[0].time", "regimen[0].dose", "seed", "bogus"):
        assert p in paths, p


def test_malformed_json():
    with pytest.raises(ConfigError, match="malformed"):
        validate_config("{nope")


def test_confluent_poles_rejected():
    with pytest.raises(ConfigError):
        parse_config({"g1": {"T1": 0.3, "T2": 0.3}})


def test_dose_beyond_horizon():
    with pytest.raises(ConfigError) as exc:
        parse_config({"regimen": [{"time": 30, "dose": 125}]})
    assert any("horizon" in e for e in exc.value.errors)


def test_unordered_regimen():
    with pytest.raises(ConfigError):
        parse_config({"regimen": [{"time": 5, "dose": 1}, {"time": 1, "dose": 1}]})


def test_empty_regimen_allowed():
    assert parse_config({"regimen": []}).regimen.doses == ()


def test_round_trip_through_dict():
    cfg = parse_config({"seed": 9, "g3": {"beta": 1.25}, "distances_mm": [1.0, 1.5],
                        "idrm": {"release_law": "proportional"}})
    again = parse_config(json.loads(cfg.to_json()))
    assert again == cfg


def test_manifest_is_accepted_as_config():
    cfg = parse_config({"seed": 5})
    manifest = {"config": cfg.to_dict(), "files": {}, "seed": 5}
    assert parse_config(manifest) == cfg


def test_overrides():
    raw = apply_overrides({}, ["g1.k=1500", "seed=4", "idrm.release_law=proportional", "output_dir=res"])
    cfg = parse_config(raw)
    assert cfg.g1.k == 1500 and cfg.seed == 4 and cfg.idrm.release_law == "proportional"
    assert cfg.output_dir == "res"
    with pytest.raises(ConfigError):
        apply_overrides({}, ["novalue"])
    with pytest.raises(ConfigError):
        apply_overrides({"g1": 3}, ["g1.k=2"])


def test_overrides_do_not_mutate_input():
    raw = {"g1": {"k": 1}}
    apply_overrides(raw, ["g1.k=2"])
    assert raw == {"g1": {"k": 1}}


@given(st.integers(0, 2**64 - 1))
def test_any_u64_seed(seed):
    assert parse_config({"seed": seed}).seed == seed


def test_defaults_type():
    assert isinstance(parse_config({}), PipelineConfig)
