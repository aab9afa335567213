import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from orbital_forge.couplings import compute_overlaps
from orbital_forge.lattice import derive_units
from orbital_forge.pulses import ScheduleError, make_sequential_schedule, to_physical
from orbital_forge.spectral import solve_site_states

durations = st.floats(min_value=1.0, max_value=500.0)
fractions = st.floats(min_value=0.05, max_value=0.95)


@pytest.fixture(scope="module")
def cs3():
    return compute_overlaps(solve_site_states(derive_units(3.0), 128, 6))


@given(durations, fractions)
def test_areas_exact(T, f):
    s = make_sequential_schedule(T, f * T)
    assert abs(s.omega_x_env.area() - math.pi) < 1e-10
    assert abs(s.omega_c_env.area() - math.pi / 2) < 1e-10


def test_areas_by_independent_quadrature():
    s = make_sequential_schedule(125.0, 31.25)
    ax = quad(s.omega_x, 0, 31.25, epsabs=1e-14)[0]
    ac = quad(s.omega_c, 31.25, 125.0, epsabs=1e-14)[0]
    assert abs(ax - math.pi) < 1e-10 and abs(ac - math.pi / 2) < 1e-10


@given(durations, fractions)
def test_peak_value(T, f):
    tS = f * T
    s = make_sequential_schedule(T, tS)
    assert math.isclose(float(s.omega_x(tS / 2)), 15 * math.pi / (8 * tS), rel_tol=1e-12)


def test_peak_in_omega_units():
    c = derive_units(3.0)
    T = c.time(750)
    s = make_sequential_schedule(T, T / 4)
    assert abs(c.in_omega(float(s.omega_x(T / 8))) - 0.0314) < 1e-4


@given(durations, fractions, st.floats(0, 1))
def test_sequential_and_nonnegative(T, f, u):
    s = make_sequential_schedule(T, f * T)
    t = u * T
    assert s.omega_x(t) * s.omega_c(t) == 0
    assert s.omega_x(t) >= 0 and s.omega_c(t) >= 0


@given(durations, fractions)
def test_endpoints_and_c1_continuity(T, f):
    tS = f * T
    s = make_sequential_schedule(T, tS)
    for env, a, b in ((s.omega_x_env, 0.0, tS), (s.omega_c_env, tS, T)):
        peak = env((a + b) / 2)
        assert 0 <= env(a) < 1e-14 * peak and 0 <= env(b) < 1e-14 * peak
        assert abs(env.derivative(a)) < 1e-12 * env.poly.coef.max() / T
        assert abs(env.derivative(b)) < 1e-12 * env.poly.coef.max() / T


@given(durations, fractions, st.floats(0.1, 10))
def test_area_invariant_under_rescaling(T, f, c):
    s = make_sequential_schedule(c * T, c * f * T)
    assert abs(s.omega_x_env.area() - math.pi) < 1e-10


@pytest.mark.parametrize("tS", [0.0, -1.0, 10.0, 12.0])
def test_switch_time_out_of_range(tS):
    with pytest.raises(ScheduleError):
        make_sequential_schedule(10.0, tS)


@given(st.floats(0, 1), st.floats(0.5, 30))
def test_running_integrals_exact(u, w):
    s = make_sequential_schedule(40.0, 12.0)
    t = u * 40.0
    ref = quad(lambda x: s.omega_x(x) * math.cos(w * x), 0, min(t, 12.0), limit=400, epsabs=1e-13)[0]
    assert abs(float(s.omega_x_env.integral_cos(t, w)) - ref) < 1e-9
    ref_c = quad(s.omega_c, 12.0, max(t, 12.0), epsabs=1e-13)[0] if t > 12.0 else 0.0
    assert abs(float(s.omega_c_env.integral(t)) - ref_c) < 1e-10


def test_physical_drive_reference_point(cs3):
    c = derive_units(3.0)
    T = c.time(750)
    d = to_physical(make_sequential_schedule(T, T / 4), cs3)
    t = np.linspace(0, T, 40001)
    assert np.max(np.abs(d.f_x(t))) / c.V0 < 0.5
    assert np.all(d.V_c(t) >= 0)
    assert d.f_x(0.0) == 0 and d.f_x(T) == 0 and d.V_c(0.0) == 0 and d.V_c(T) == 0
    assert d.omega_x == cs3.omega_d


def test_drive_oscillates_at_omega_d(cs3):
    c = derive_units(3.0)
    T = c.time(750)
    d = to_physical(make_sequential_schedule(T, T / 4), cs3)
    t = np.linspace(0, T / 4, 2**15, endpoint=False)
    spec = np.abs(np.fft.rfft(d.f_x(t)))
    freqs = 2 * np.pi * np.fft.rfftfreq(len(t), t[1] - t[0])
    assert abs(freqs[np.argmax(spec)] - cs3.omega_d) < 2 * (freqs[1] - freqs[0]) + 0.02 * cs3.omega_d


def test_zero_control_gives_zero_vc(cs3):
    s = make_sequential_schedule(10.0, 5.0)
    d = to_physical(s, cs3)
    assert np.all(d.V_c(np.linspace(0, 5, 11)) == 0)


def test_vanishing_coupling_rejected(cs3):
    bad = cs3.__class__(**{**cs3.as_dict(), "gamma1": 0.0})
    with pytest.raises(ZeroDivisionError):
        to_physical(make_sequential_schedule(10.0, 5.0), bad)
