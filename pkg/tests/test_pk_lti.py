import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import trapezoid

from mcdds.pk_lti import (
    DoseEvent,
    G1Params,
    G2Params,
    G3Params,
    Regimen,
    analytic_cascade_impulse,
    cascade_response,
    convolve,
    delay,
    g1_closed_form,
    g1_impulse_response,
    g1_peak_time,
    g2_apply,
    g3_apply,
    g3_impulse_kernel,
)
from mcdds.quantities import HOUR, SECOND, TimeGrid, TimeSeries, make_time_grid

T1_PARAMS = G1Params()
AVG = (G1Params(), G2Params(a=0.5, T3=0.2), G3Params(beta=1.0))


def hour_grid(end=24.0, dt=1e-3):
    return make_time_grid(0.0, end, dt, HOUR)


# parameter bundles


@pytest.mark.parametrize(
    "kw",
    [dict(k=0), dict(T1=-1), dict(T2=0), dict(T0=-0.1), dict(T1=0.3, T2=0.3)],
)
def test_g1_invariants(kw):
    with pytest.raises(ValueError):
        G1Params(**kw)


@pytest.mark.parametrize("a", [0.0, 1.0, 1.5, -0.2])
def test_g2_a_open_interval(a):
    with pytest.raises(ValueError):
        G2Params(a=a)


def test_regimen_order_and_dose():
    with pytest.raises(ValueError):
        Regimen((DoseEvent(2.0, 125), DoseEvent(1.0, 125)))
    with pytest.raises(ValueError):
        DoseEvent(0.0, 0.0)


# G1


def test_g1_zero_before_delay():
    t = np.linspace(0, T1_PARAMS.T0, 50)
    assert np.all(g1_closed_form(T1_PARAMS, 125, t) == 0.0)


def test_g1_peak_matches_stationary_point():
    h = g1_impulse_response(T1_PARAMS, 125.0, hour_grid(3.0, 1e-4))
    t_star = T1_PARAMS.T0 + (T1_PARAMS.T1 * T1_PARAMS.T2 / (T1_PARAMS.T2 - T1_PARAMS.T1)) * math.log(
        T1_PARAMS.T2 / T1_PARAMS.T1
    )
    assert abs(h.peak()[0] - t_star) <= 1e-4
    assert g1_peak_time(T1_PARAMS) == pytest.approx(0.3908, abs=1e-4)


def test_g1_area_is_k():
    h = g1_impulse_response(T1_PARAMS, 125.0, hour_grid(50.0))
    assert h.integral() == pytest.approx(1418.0, rel=1e-3)


def test_g1_scales_with_dose():
    t = np.linspace(0, 10, 101)
    np.testing.assert_allclose(g1_closed_form(T1_PARAMS, 250, t), 2 * g1_closed_form(T1_PARAMS, 125, t))


def test_g1_needs_hours():
    with pytest.raises(ValueError, match="hour"):
        g1_impulse_response(T1_PARAMS, 125, make_time_grid(0, 100, 1, SECOND))


@given(st.floats(0.01, 1.0), st.floats(1.05, 20.0), st.floats(0, 1))
def test_g1_continuous_and_nonnegative(T1, ratio, T0):
    p = G1Params(k=1.0, T1=T1, T2=T1 * ratio, T0=T0)
    t = np.linspace(0, T0 + 10 * T1 * ratio, 400)
    v = g1_closed_form(p, 125, t)
    assert np.all(v >= 0)
    # slope at onset is k / (T1 T2)
    assert g1_closed_form(p, 125, [T0 + 1e-12])[0] <= 2e-12 / (p.T1 * p.T2)


# G2


def test_g2_pure_gain():
    g = hour_grid(2.0)
    s = TimeSeries(g, np.cos(g.times) ** 2)
    np.testing.assert_array_equal(g2_apply(s, G2Params(0.5, 0.0)).values, 0.5 * s.values)


def test_g2_shift_and_scale_of_peak():
    plasma = g1_impulse_response(T1_PARAMS, 125.0, hour_grid(5.0))
    out = g2_apply(plasma, G2Params(0.75, 0.2))
    (tp, vp), (to, vo) = plasma.peak(), out.peak()
    assert vo == pytest.approx(0.75 * vp, rel=1e-12)
    assert to - tp == pytest.approx(0.2, abs=1e-9)


def test_g2_zero_in_zero_out():
    s = TimeSeries(hour_grid(1.0), np.zeros(1001))
    assert not g2_apply(s, G2Params()).values.any()


def test_fractional_delay_is_linear_interpolation():
    g = TimeGrid(0.0, 1.0, 6)
    s = TimeSeries(g, [0.0, 1.0, 2.0, 3.0, 4.0, 5.0])
    out = delay(s, 1.5)
    # out(t) = s(t - 1.5) for t >= 1.5, zero before
    np.testing.assert_allclose(out.values, [0, 0, 0.5, 1.5, 2.5, 3.5])


@given(st.floats(0.0, 3.0))
def test_delay_is_interpolated_shift(shift):
    g = hour_grid(6.0, 1e-2)
    s = g1_impulse_response(T1_PARAMS, 125, g)
    out = delay(s, shift)
    expect = np.interp(g.times - shift, g.times, s.values, left=0.0)
    np.testing.assert_allclose(out.values, expect, rtol=0, atol=1e-9 * s.values.max())


@given(st.integers(0, 600), st.integers(0, 600))
def test_delays_compose(m1, m2):
    g = hour_grid(8.0, 1e-2)
    s = g1_impulse_response(T1_PARAMS, 125, g)
    a = delay(delay(s, m1 * g.dt), m2 * g.dt)
    np.testing.assert_array_equal(a.values, delay(s, (m1 + m2) * g.dt).values)


# G3


def test_g3_kernel_values():
    k = g3_impulse_kernel(G3Params(1.0), hour_grid(2.0))
    assert k.values[0] == 1.0
    assert k.values[1000] == pytest.approx(math.exp(-1), rel=1e-15)


@pytest.mark.parametrize("beta", [0.5, 1.0, 1.5, 3.0])
def test_g3_kernel_unit_area(beta):
    k = g3_impulse_kernel(G3Params(beta), hour_grid(30 / beta, 1e-3))
    # trapezoid bias is beta^2 dt^2 / 12 plus a tail of e^-30
    assert k.integral() == pytest.approx(1.0, abs=1e-6)


def test_g3_kernels_cross_once():
    g = hour_grid(20.0)
    a = g3_impulse_kernel(G3Params(0.5), g).values
    b = g3_impulse_kernel(G3Params(1.5), g).values
    assert b[0] > a[0]
    s = np.sign(b - a)
    s = s[s != 0]
    assert np.count_nonzero(np.diff(s)) == 1
    # crossing at ln(b2/b1)/(b2-b1)
    cross = g.times[np.argmax(b < a)]
    assert cross == pytest.approx(math.log(3) / 1.0, abs=1e-3)


def test_g3_kernel_grid_must_start_at_zero():
    with pytest.raises(ValueError):
        g3_impulse_kernel(G3Params(), TimeGrid(1.0, 0.1, 10))


# convolution


def test_convolve_identity():
    g = hour_grid(2.0)
    f = TimeSeries(g, np.sin(3 * g.times) + 1.0)
    delta = np.zeros(g.n)
    delta[0] = 1.0 / g.dt
    out = convolve(f, TimeSeries(g, delta))
    np.testing.assert_allclose(out.values, f.values, rtol=0, atol=1e-9)


@given(st.lists(st.floats(0, 10), min_size=3, max_size=40), st.sampled_from(["rectangle", "trapezoid"]))
def test_convolve_commutes(vals, rule):
    g = TimeGrid(0.0, 0.1, len(vals))
    f = TimeSeries(g, vals)
    h = TimeSeries(g, np.exp(-np.arange(len(vals)) / 5.0))
    np.testing.assert_allclose(convolve(f, h, rule).values, convolve(h, f, rule).values, atol=1e-12)


@pytest.mark.parametrize("dt", [1e-2, 5e-3])
def test_box_box_is_triangle(dt):
    width = 1.0
    g = make_time_grid(0.0, 3.0, dt, HOUR)
    box = TimeSeries(g, np.where(g.times <= width + 1e-12, 1.0, 0.0))
    out = convolve(box, box, rule="trapezoid")
    # analytic: triangle with apex box_area^2 / width = 1 at t = width
    assert out.values.max() == pytest.approx(width**2 / width, abs=2 * dt)
    tri = np.clip(np.minimum(g.times, 2 * width - g.times), 0, None)
    assert np.max(np.abs(out.values - tri)) <= 2 * dt


def test_convolve_mismatched_dt():
    with pytest.raises(ValueError, match="mismatched"):
        convolve(TimeSeries(TimeGrid(0, 0.1, 3), [1, 2, 3]), TimeSeries(TimeGrid(0, 0.2, 3), [1, 2, 3]))


def test_trapezoid_second_order_for_smooth_input():
    # (e^{-t} * e^{-2t})(t) = e^{-t} - e^{-2t}
    errs = []
    for dt in (1e-2, 5e-3):
        g = make_time_grid(0.0, 5.0, dt, HOUR)
        f = TimeSeries(g, np.exp(-g.times))
        h = TimeSeries(g, np.exp(-2 * g.times))
        exact = np.exp(-g.times) - np.exp(-2 * g.times)
        errs.append(np.max(np.abs(convolve(f, h, "trapezoid").values - exact)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


# cascade


def test_cascade_zero_before_total_delay():
    g = hour_grid(3.0)
    out = cascade_response(Regimen.single(), *AVG, g)
    t = g.times
    assert not out.values[t < 0.4461 - 1e-9].any()
    first = t[np.argmax(out.values > 0)]
    assert abs(first - 0.4461) <= g.dt


def test_cascade_doubling_doses_doubles_output():
    g = hour_grid(12.0)
    reg = Regimen((DoseEvent(0.0, 125), DoseEvent(3.3, 62.5)))
    a = cascade_response(reg, *AVG, g).values
    b = cascade_response(reg.scaled(2.0), *AVG, g).values
    np.testing.assert_array_equal(b, 2 * a)


def test_two_doses_is_shift_add():
    g = hour_grid(12.0)
    one = cascade_response(Regimen.single(), *AVG, g)
    two = cascade_response(Regimen((DoseEvent(0.0, 125), DoseEvent(4.0, 125))), *AVG, g)
    shifted = delay(one, 4.0)
    np.testing.assert_allclose(two.values, one.values + shifted.values, rtol=0, atol=1e-9)


def test_dose_outside_grid():
    with pytest.raises(ValueError, match="outside"):
        cascade_response(Regimen.single(time=30.0), *AVG, hour_grid(24.0))


@given(st.floats(0.3, 3.0), st.floats(0.1, 0.9), st.floats(0.0, 0.5))
def test_cascade_nonnegative(beta, a, T3):
    g = hour_grid(8.0, 5e-3)
    out = cascade_response(Regimen.single(), G1Params(), G2Params(a, T3), G3Params(beta), g)
    assert out.values.min() >= 0.0


@given(st.floats(0.1, 5.0), st.floats(-3, 3))
def test_stage_linearity(c, phase):
    g = hour_grid(6.0, 1e-2)
    f = TimeSeries(g, g1_closed_form(T1_PARAMS, 125, g.times))
    h = TimeSeries(g, np.sin(g.times + phase) ** 2)
    comb = TimeSeries(g, c * f.values + h.values)
    for stage in (lambda s: g2_apply(s, G2Params(0.6, 0.25)), lambda s: g3_apply(s, G3Params(0.8))):
        lhs = stage(comb).values
        rhs = c * stage(f).values + stage(h).values
        np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-9 * np.abs(rhs).max())


# analytic cascade


def test_analytic_zero_before_delay():
    t = np.linspace(0, 0.4461, 20)
    assert not analytic_cascade_impulse(*AVG, t).any()


def test_analytic_area_is_k_a():
    t = np.linspace(0, 100, 200_001)
    v = analytic_cascade_impulse(*AVG, t)
    assert trapezoid(v, t) == pytest.approx(1418 * 0.5, rel=1e-3)


def test_analytic_matches_numeric():
    g = hour_grid(24.0)
    num = cascade_response(Regimen.single(), *AVG, g).values
    ana = analytic_cascade_impulse(*AVG, g.times)
    assert np.max(np.abs(num - ana)) <= 1e-3 * ana.max()


def test_analytic_coincident_poles():
    with pytest.raises(ValueError, match="coincident"):
        analytic_cascade_impulse(G1Params(T1=0.5, T2=2.0), G2Params(), G3Params(beta=2.0), 1.0)


def test_analytic_scalar_input():
    assert isinstance(analytic_cascade_impulse(*AVG, 1.0), float)
