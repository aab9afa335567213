import math

import numpy as np
import pytest

from oracle_values import MATHIEU
from orbital_forge.lattice import derive_units
from orbital_forge.spectral import solve_site_states
from orbital_forge.tunneling import (
    BandIdentificationError,
    LocalizedState,
    NoOscillationError,
    chain_return_probability,
    localized_band2_state,
    site_overlap,
    tunneling_rate_dynamic,
    tunneling_rate_quadrature,
)

C35 = derive_units(3.5)


@pytest.fixture(scope="module")
def state35():
    return localized_band2_state(C35)


def test_localized_in_central_cell(state35):
    assert state35.central_probability() > 0.9
    assert abs(np.sum(state35.psi**2) * state35.dx - 1) < 1e-10


def test_localized_state_even(state35):
    assert np.max(np.abs(state35.psi - state35.psi[::-1])) < 1e-8


def test_overlap_with_site_state(state35):
    assert site_overlap(state35, solve_site_states(C35, 128, 6)) > 0.99


def test_band_multiplet_must_be_isolated():
    with pytest.raises(BandIdentificationError):
        localized_band2_state(derive_units(0.6))


@pytest.mark.parametrize("n", [1, 2, 4])
def test_cell_count_validated(n):
    with pytest.raises(ValueError):
        localized_band2_state(C35, n)


def test_quadrature_decreases_with_depth():
    rates = []
    for v in (3.0, 3.5, 4.0, 4.5, 5.0):
        c = derive_units(v)
        rates.append(tunneling_rate_quadrature(localized_band2_state(c), c) / c.omega)
    assert np.all(np.diff(rates) < 0)


def test_quadrature_zero_for_disjoint_supports(state35):
    psi = np.where(np.abs(state35.x) < state35.ell, state35.psi, 0.0)
    cut = LocalizedState(state35.x, psi, state35.n_cells, state35.ell, state35.band_energies, state35.points_per_cell)
    assert tunneling_rate_quadrature(cut, C35) == 0.0


def test_chain_model_three_cells():
    # walls at barrier tops: energies -J, +J, +2J; central weights 2/3 and 1/3 beat at 3J
    t = np.linspace(0, 2 * np.pi, 2001)
    pc = chain_return_probability(3, 1.0, t)
    expected = np.abs(2 / 3 * np.exp(1j * t) + 1 / 3 * np.exp(-2j * t)) ** 2
    assert np.max(np.abs(pc - expected)) < 1e-12
    assert abs(chain_return_probability(3, 1.0, np.pi / 3) - 1 / 9) < 1e-12


def test_chain_band_energies_match_model(state35):
    E = np.sort(state35.band_energies)
    J = MATHIEU[3.5]["J2_over_omega"] * C35.omega
    gaps = np.diff(E) / J
    assert abs(gaps[0] - 2) < 0.05 and abs(gaps[1] - 1) < 0.05


@pytest.mark.parametrize("v", [3.0, 3.5, 4.0])
def test_dynamic_rate_matches_band_width_oracle(v):
    c = derive_units(v)
    rd = tunneling_rate_dynamic(c, c.time(8000.0)) / c.omega
    assert abs(rd / MATHIEU[v]["J2_over_omega"] - 1) < 0.03


def test_dynamic_rate_independent_of_chain_length():
    c = derive_units(3.5)
    a = tunneling_rate_dynamic(c, c.time(3000.0), 3)
    b = tunneling_rate_dynamic(c, c.time(3000.0), 5)
    assert abs(a / b - 1) < 0.03


def test_no_oscillation_reports_bound():
    with pytest.raises(NoOscillationError, match="below"):
        tunneling_rate_dynamic(C35, C35.time(50.0))


def test_central_population_conserves_norm(state35):
    from orbital_forge.tunneling import central_population_series

    t, pc = central_population_series(state35, C35, C35.time(400.0), n_samples=20)
    assert np.all((pc > 0) & (pc <= 1 + 1e-12))
    assert math.isclose(pc[0], state35.central_probability(), rel_tol=1e-12)
