import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracle_values import MATHIEU
from orbital_forge.lattice import derive_units
from orbital_forge.spectral import InsufficientStatesError, count_bound_states, solve_site_states


@pytest.fixture(scope="module")
def basis3():
    return solve_site_states(derive_units(3.0), 128, 8)


def test_orthonormal(basis3):
    G = basis3.gammas
    assert np.max(np.abs(G @ G.T * basis3.dx - np.eye(len(G)))) < 1e-10


def test_parities_and_ordering(basis3):
    assert basis3.parities[:3] == ("even", "odd", "even")
    E = basis3.energies
    assert E[0] < E[1] < E[2]


def test_reflection_parity(basis3):
    # grid point -ell has no mirror partner; compare the symmetric interior
    G = basis3.gammas[:, 1:]
    for n, p in enumerate(basis3.parities):
        s = 1 if p == "even" else -1
        assert np.max(np.abs(G[n] - s * G[n][::-1])) < 1e-10


@pytest.mark.parametrize("v", [3.0, 3.5, 4.0])
def test_omega_d_matches_mathieu_oracle(v):
    b = solve_site_states(derive_units(v), 128, 6)
    assert abs(b.omega_d - MATHIEU[v]["omega_d"]) < 1e-9


def test_omega_d_below_harmonic_at_v3(basis3):
    r = basis3.omega_d / 6.0
    assert 1.5 < r < 2.0


def test_omega_d_harmonic_limit():
    c = derive_units(8.0)
    b = solve_site_states(c, 128, 6)
    assert abs(b.omega_d / c.omega - 2) < 0.1


def test_grid_doubling_converged():
    c = derive_units(3.0)
    a = solve_site_states(c, 128, 6)
    b = solve_site_states(c, 256, 6)
    assert np.max(np.abs(a.energies[[0, 2]] - b.energies[[0, 2]])) < 1e-8


def test_evaluate_matches_samples(basis3):
    for n in range(basis3.n_states):
        assert np.max(np.abs(basis3.evaluate(n, basis3.x) - basis3.gammas[n])) < 1e-12


def test_sign_convention(basis3):
    assert basis3.evaluate(0, 0.0) > 0 and basis3.evaluate(2, 0.0) > 0
    assert basis3.evaluate(1, 1e-4) > 0


def test_bound_state_counts():
    counts = []
    for v in np.linspace(1, 5, 9):
        c = derive_units(v)
        counts.append(count_bound_states(solve_site_states(c, 128, 14), c))
    assert all(b >= a for a, b in zip(counts, counts[1:]))
    c3 = derive_units(3.0)
    assert count_bound_states(solve_site_states(c3, 128, 10), c3) >= 3
    c02 = derive_units(0.2)
    assert count_bound_states(solve_site_states(c02, 128, 6), c02) < 3


def test_count_requires_enough_states():
    c = derive_units(6.0)
    with pytest.raises(InsufficientStatesError):
        count_bound_states(solve_site_states(c, 128, 5), c)


@pytest.mark.parametrize("m_grid, n_states", [(32, 6), (128, 3)])
def test_rejects_small_requests(m_grid, n_states):
    with pytest.raises(ValueError):
        solve_site_states(derive_units(3.0), m_grid, n_states)


@given(st.floats(min_value=0.5, max_value=6.0))
def test_gamma0_gamma2_orthogonal(v):
    b = solve_site_states(derive_units(v), 64, 5)
    assert abs(np.sum(b.gammas[0] * b.gammas[2]) * b.dx) < 1e-12


def test_separable_pair_energies(basis3):
    E = basis3.energies
    e00, e20, e22 = 2 * E[0], E[0] + E[2], 2 * E[2]
    assert abs((e22 - e00) - 2 * (e20 - e00)) < 1e-12
