import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from orbital_forge.lattice import (
    CallableDrive,
    InvalidConfigError,
    LabReport,
    LabUnits,
    PhysicalDrive,
    derive_units,
    from_experimental,
    potential,
    potential_rotated_form,
    to_experimental,
)

depths = st.floats(min_value=0.2, max_value=10.0)
coords = st.floats(min_value=-10.0, max_value=10.0)


def drive_for(a, b, w):
    return CallableDrive(fx=lambda t: a * np.cos(w * np.asarray(t)), vc=lambda t: b * np.sin(np.asarray(t)) ** 2)


def test_derive_units_v3():
    c = derive_units(3.0)
    assert c.V0 == 18.0 and c.omega == 6.0
    assert c.ell == math.pi / 2 and c.k == 1.0
    assert c.k_s == math.sqrt(2.0)


def test_derive_units_v35_depth_in_recoils():
    c = derive_units(3.5)
    assert c.V0 == 24.5 and c.omega == 7.0
    assert c.recoil_energy == 0.5
    assert c.depth_in_recoils == 49.0


@pytest.mark.parametrize("v", [0.0, -1.0, float("nan"), float("inf")])
def test_derive_units_rejects_bad_depth(v):
    with pytest.raises(InvalidConfigError):
        derive_units(v)


@given(depths)
def test_unit_relations(v):
    c = derive_units(v)
    assert math.isclose(c.V0, 2 * v * v)
    assert math.isclose(c.omega, math.sqrt(2 * c.V0))
    assert math.isclose(c.in_inv_omega(c.time(123.0)), 123.0)
    assert math.isclose(c.in_omega(c.freq(0.7)), 0.7)


def test_potential_simple_points():
    c = derive_units(3.0)
    assert potential(0.0, 0.0, 0.0, c) == 0.0
    assert math.isclose(potential(c.ell, 0.0, 0.0, c), c.V0)


@given(coords, coords, st.floats(0, 100), st.floats(-5, 5), st.floats(0, 5), st.floats(0.1, 20))
def test_rotated_form_differs_by_offset(x, y, t, a, b, w):
    c = derive_units(3.0)
    d = drive_for(a, b, w)
    diff = potential_rotated_form(x, y, t, c, d) - potential(x, y, t, c, d)
    assert abs(diff - d.V_c(t)) < 1e-12


def test_rotated_form_random_samples():
    rng = np.random.default_rng(7)
    c = derive_units(3.0)
    d = drive_for(1.3, 2.1, 10.0)
    x, y, t = rng.uniform(-5, 5, 1000), rng.uniform(-5, 5, 1000), rng.uniform(0, 50, 1000)
    diff = potential_rotated_form(x, y, t, c, d) - potential(x, y, t, c, d)
    assert np.max(np.abs(diff - d.V_c(t))) < 1e-12


@given(coords, coords, st.floats(0, 100))
def test_potential_periodic_and_even(x, y, t):
    c = derive_units(3.0)
    d = drive_for(0.8, 1.5, 7.0)
    v = potential(x, y, t, c, d)
    L = 2 * c.ell
    assert abs(potential(x + L, y, t, c, d) - v) < 1e-9
    assert abs(potential(x, y + L, t, c, d) - v) < 1e-9
    assert abs(potential(-x, y, t, c, d) - v) < 1e-12
    assert abs(potential(x, -y, t, c, d) - v) < 1e-12


def test_base_drive_is_undriven():
    d = PhysicalDrive()
    assert np.all(d.f_x(np.linspace(0, 1, 5)) == 0)
    assert np.all(d.V_c(np.linspace(0, 1, 5)) == 0)


def test_lab_conversion_cs133():
    lab = LabUnits.from_species("Cs133", 1064)
    c = derive_units(3.5, lab)
    r = to_experimental(c, omega_d=1.75 * c.omega, T=c.time(500))
    assert r.depth_in_recoils == 49.0
    assert abs(r.T_ms - 4.3) < 0.43


def test_lab_conversion_requires_lab():
    with pytest.raises(InvalidConfigError):
        to_experimental(derive_units(3.0), 1.0, 1.0)


def test_unknown_species():
    with pytest.raises(InvalidConfigError):
        LabUnits.from_species("Xx1", 1064)


@given(depths, st.floats(0.1, 100), st.floats(1.0, 1e5))
def test_lab_round_trip(v, wd, T):
    c = derive_units(v, LabUnits.from_species("Rb87", 780))
    back = from_experimental(c, to_experimental(c, wd, T))
    assert math.isclose(back[0], wd, rel_tol=1e-12)
    assert math.isclose(back[1], T, rel_tol=1e-12)


def test_lab_report_dict():
    r = LabReport(1.0, 2.0, 3.0, 4.0)
    assert r.as_dict() == {"depth_in_recoils": 1.0, "omega_rad_s": 2.0, "f_drive_Hz": 3.0, "T_ms": 4.0}
