import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcdds.quantities import (
    HOUR,
    MG,
    MINUTE,
    MODEL_UNITS,
    SECOND,
    TimeGrid,
    TimeSeries,
    UnitTag,
    convert_time,
    make_time_grid,
    resample,
)


def test_one_hour_is_3600_s():
    assert convert_time(1.0, HOUR, SECOND) == 3600.0


def test_t0_in_seconds():
    assert convert_time(0.2461, HOUR, SECOND) == pytest.approx(885.96, rel=1e-15)


def test_dimension_mismatch_raises():
    with pytest.raises(ValueError, match="dimension"):
        convert_time(1.0, HOUR, MG)


@given(st.floats(min_value=1e-9, max_value=1e9), st.sampled_from([HOUR, MINUTE, SECOND]),
       st.sampled_from([HOUR, MINUTE, SECOND]))
def test_time_round_trip(x, a, b):
    back = convert_time(convert_time(x, a, b), b, a)
    assert back == pytest.approx(x, rel=1e-15)


def test_unit_scale_must_be_positive():
    with pytest.raises(ValueError):
        UnitTag("time", "bad", 0.0)


@pytest.mark.parametrize(
    "args, expected",
    [
        ((0, 1, 0.5), [0.0, 0.5, 1.0]),
        ((0, 1, 0.3), [0.0, 0.3, 0.6, 0.9]),
    ],
)
def test_make_time_grid_floor_rule(args, expected):
    g = make_time_grid(*args)
    assert g.n == len(expected)
    np.testing.assert_allclose(g.times, expected, rtol=0, atol=1e-15)


def test_eight_hours_at_1e3():
    assert make_time_grid(0, 8, 0.001, HOUR).n == 8001


@pytest.mark.parametrize("args", [(0, 1, 0.0), (0, 1, -0.1), (1, 1, 0.1), (2, 1, 0.1)])
def test_make_time_grid_rejects(args):
    with pytest.raises(ValueError):
        make_time_grid(*args)


def test_grid_needs_two_samples():
    with pytest.raises(ValueError):
        TimeGrid(0.0, 1.0, 1)


@given(st.floats(-100, 100), st.floats(1e-4, 10), st.integers(2, 5000))
def test_grid_times_are_exact_products(t0, dt, n):
    g = TimeGrid(t0, dt, n)
    i = np.arange(n)
    # t_start + i*dt with no running sum, bit for bit
    assert np.array_equal(g.times, t0 + i * dt)
    assert np.all(np.diff(g.times) > 0)


@given(st.floats(0, 100), st.floats(2, 50), st.floats(1e-3, 1))
def test_make_time_grid_stays_inside(t0, span, dt):
    g = make_time_grid(t0, t0 + span, dt)
    assert g.t_end <= t0 + span + 1e-9 * dt
    assert g.t_end + dt > t0 + span - 1e-9 * max(1.0, span)


def test_series_rejects_nan_and_length():
    g = TimeGrid(0.0, 1.0, 3)
    with pytest.raises(ValueError):
        TimeSeries(g, [0.0, math.nan, 1.0])
    with pytest.raises(ValueError):
        TimeSeries(g, [0.0, math.inf, 1.0])
    with pytest.raises(ValueError):
        TimeSeries(g, [0.0, 1.0])


def test_series_is_read_only():
    s = TimeSeries(TimeGrid(0.0, 1.0, 3), [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        s.values[0] = 5.0


def test_integral_is_trapezoid():
    s = TimeSeries(TimeGrid(0.0, 0.5, 3), [0.0, 2.0, 0.0])
    assert s.integral() == 1.0


def test_resample_identity_is_bitwise():
    g = make_time_grid(0, 2, 0.1)
    s = TimeSeries(g, np.sin(g.times))
    assert np.array_equal(resample(s, g).values, s.values)


def test_resample_midpoint():
    s = TimeSeries(TimeGrid(0.0, 1.0, 2), [0.0, 2.0])
    out = resample(s, TimeGrid(0.0, 0.5, 3))
    assert out.values[1] == 1.0


def test_hours_to_seconds_consistency():
    g = make_time_grid(0, 1, 0.01, HOUR)
    s = TimeSeries(g, np.exp(-g.times) * g.times, MODEL_UNITS)
    out = resample(s, make_time_grid(0, 3600, 10.0, SECOND))
    i = int(np.flatnonzero(out.times == 1800.0)[0])
    j = int(np.flatnonzero(np.isclose(g.times, 0.5))[0])
    assert abs(out.values[i] - s.values[j]) <= 1e-12


def test_resample_rejects_out_of_span():
    s = TimeSeries(TimeGrid(0.0, 1.0, 3), [0.0, 1.0, 2.0])
    with pytest.raises(ValueError, match="outside"):
        resample(s, TimeGrid(1.0, 1.0, 3))


@given(st.integers(2, 50), st.integers(1, 7))
def test_resample_idempotent_on_refinement(n, m):
    g = TimeGrid(0.0, 1.0, n)
    s = TimeSeries(g, np.cos(np.arange(n)))
    fine = TimeGrid(0.0, 1.0 / m, (n - 1) * m + 1)
    once = resample(s, fine)
    np.testing.assert_array_equal(resample(once, fine).values, once.values)
    # knots of the coarse grid are reproduced exactly
    np.testing.assert_array_equal(once.values[::m], s.values)


@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=40))
def test_csv_round_trip(tmp_path_factory, vals):
    path = tmp_path_factory.mktemp("csv") / "s.csv"
    s = TimeSeries(TimeGrid(0.0, 0.25, len(vals), SECOND), vals, MG)
    text = s.to_csv(path)
    assert text.splitlines()[0] == "t_s,value_mg"
    back = TimeSeries.from_csv(path)
    np.testing.assert_array_equal(back.values, s.values)
    assert back.grid.unit == SECOND and back.unit == MG
