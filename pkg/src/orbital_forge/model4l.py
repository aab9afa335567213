"""Four-level model on the basis (|00>, |20>, |02>, |22>).

Two Hamiltonians are provided: the rotating-wave model used to design the
pulses, and the interaction-picture Hamiltonian before the rotating-wave step
(all seven couplings with their fast phases). Both are propagated with a
fourth-order Magnus integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .couplings import CouplingSet, chi_tilde, g_factor
from .pulses import ModulatedDrive, PulseSchedule

LABELS = ("00", "20", "02", "22")
I00, I20, I02, I22 = range(4)

GROUND = np.array([1, 0, 0, 0], dtype=complex)
PLUS = np.array([0, 1, 1j, 0], dtype=complex) / math.sqrt(2)

HamiltonianBuilder = Callable[[np.ndarray], np.ndarray]


class IntegrationError(RuntimeError):
    pass


class NormalizationError(ValueError):
    pass


def build_h4l(
    schedule: PulseSchedule,
    detuning: float,
    couplings: CouplingSet,
    t,
    with_g_factors: bool = False,
) -> np.ndarray:
    """Rotating-wave Hamiltonian at time(s) ``t``; shape ``(..., 4, 4)``.

    ``H = detuning |00><00| + 1/2 [Om1 |20><00| - Om_c |02><20| + Om2 |02><22| + h.c.]``
    with ``Om1 = Om2 = Omega_x`` unless ``with_g_factors`` multiplies them by
    ``G_{2,0,0,0}`` and ``G_{0,2,2,2}``.
    """
    t = np.asarray(t, dtype=float)
    ox = schedule.omega_x(t).astype(complex)
    oc = schedule.omega_c(t)
    om1 = om2 = ox
    if with_g_factors:
        int_vc = schedule.omega_c_env.integral(t) / (2 * couplings.gamma1)
        om1 = ox * g_factor((2, 0, 0, 0), couplings, int_vc)
        om2 = ox * g_factor((0, 2, 2, 2), couplings, int_vc)
    H = np.zeros(t.shape + (4, 4), dtype=complex)
    H[..., I00, I00] = detuning
    H[..., I20, I00] = 0.5 * om1
    H[..., I02, I20] = -0.5 * oc
    H[..., I02, I22] = 0.5 * om2
    return _hermitize(H)


def build_pre_rwa(drive: ModulatedDrive, couplings: CouplingSet, t, chi: str = "exact") -> np.ndarray:
    """Interaction-picture Hamiltonian before any rotating-wave truncation.

    ``chi`` selects the running integral of ``f_x`` inside the dressing phases:
    ``"exact"`` (closed-form quadrature) or ``"slow"`` (slow-envelope form).
    """
    t = np.asarray(t, dtype=float)
    c = couplings
    wx, wd = drive.omega_x, c.omega_d
    fx = drive.f_x(t)
    vc = drive.V_c(t)
    F = drive.int_fx(t) if chi == "exact" else drive.int_fx_slow(t)
    C = drive.int_vc(t)

    def ct(idx):
        return chi_tilde(idx, c, F, C)

    H = np.zeros(t.shape + (4, 4), dtype=complex)
    H[..., I00, I00] = wx - wd
    H[..., I20, I00] = (c.gamma0 * fx - vc * c.gamma2) * np.exp(1j * wx * t) * ct((2, 0, 0, 0))
    H[..., I02, I22] = (c.gamma0 * fx - vc * c.gamma3) * np.exp(-1j * wd * t) * ct((0, 2, 2, 2))
    H[..., I00, I22] = -vc * c.gamma1 * np.exp(-1j * (wx + wd) * t) * ct((0, 0, 2, 2))
    H[..., I00, I02] = -vc * c.gamma2 * np.exp(-1j * wx * t) * ct((0, 0, 0, 2))
    H[..., I20, I02] = -vc * c.gamma1 * ct((2, 0, 0, 2))
    H[..., I20, I22] = -vc * c.gamma3 * np.exp(-1j * wd * t) * ct((2, 0, 2, 2))
    return _hermitize(H)


def _hermitize(H: np.ndarray) -> np.ndarray:
    # entries were filled on one side of the diagonal only
    diag = np.einsum("...ii->...i", H).copy()
    H = H + np.conj(np.swapaxes(H, -1, -2))
    idx = np.arange(4)
    H[..., idx, idx] = diag
    return H


@dataclass(frozen=True)
class FourLevelTrajectory:
    times: np.ndarray
    states: np.ndarray

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.states) ** 2

    @property
    def fidelity(self) -> np.ndarray:
        return np.abs(self.states @ np.conj(PLUS)) ** 2

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


_GL = math.sqrt(3) / 6


def _magnus_steps(builder: HamiltonianBuilder, t0: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Fourth-order Magnus propagators for steps ``[t0, t0 + h]``."""
    H1 = builder(t0 + h * (0.5 - _GL))
    H2 = builder(t0 + h * (0.5 + _GL))
    comm = H2 @ H1 - H1 @ H2
    heff = 0.5 * (H1 + H2) - 1j * (math.sqrt(3) / 12) * h[:, None, None] * comm
    heff = 0.5 * (heff + np.conj(np.swapaxes(heff, -1, -2)))
    w, V = np.linalg.eigh(heff)
    phase = np.exp(-1j * w * h[:, None])
    return (V * phase[:, None, :]) @ np.conj(np.swapaxes(V, -1, -2))


def propagate_4l(
    builder: HamiltonianBuilder,
    initial: np.ndarray,
    times,
    dt: float = 0.01,
    rtol: float | None = None,
) -> FourLevelTrajectory:
    """Propagate ``initial`` and sample at ``times`` (strictly increasing).

    Each sampling interval is split into equal Magnus steps no longer than
    ``dt``. With ``rtol`` set, the run is repeated at ``dt / 2`` and an
    :class:`IntegrationError` is raised if the final amplitudes differ by more
    than ``rtol``.
    """
    psi0 = np.asarray(initial, dtype=complex)
    norm = np.linalg.norm(psi0)
    if abs(norm - 1) > 1e-10:
        raise NormalizationError(f"initial state norm {norm:.12f} != 1")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be a strictly increasing 1D array")

    traj = _propagate(builder, psi0, times, dt)
    if rtol is not None:
        fine = _propagate(builder, psi0, times, dt / 2)
        err = float(np.max(np.abs(fine.final_state - traj.final_state)))
        if err > rtol:
            raise IntegrationError(f"step halving changed final amplitudes by {err:.2e} > {rtol:.1e} at dt={dt}")
        traj = fine
    return traj


def _propagate(builder, psi0, times, dt) -> FourLevelTrajectory:
    nsub = np.maximum(1, np.ceil(np.diff(times) / dt).astype(int))
    starts, steps = [], []
    for i, n in enumerate(nsub):
        h = (times[i + 1] - times[i]) / n
        starts.append(times[i] + h * np.arange(n))
        steps.append(np.full(n, h))
    states = np.empty((len(times), 4), dtype=complex)
    states[0] = psi0
    if len(times) == 1:
        return FourLevelTrajectory(times, states)
    t0 = np.concatenate(starts)
    h = np.concatenate(steps)
    U = _magnus_steps(builder, t0, h)
    psi = psi0.copy()
    ends = np.cumsum(nsub)
    k = 0
    for j, end in enumerate(ends):
        while k < end:
            psi = U[k] @ psi
            k += 1
        states[j + 1] = psi
    return FourLevelTrajectory(times, states)


def fidelity(state, target=PLUS) -> float:
    """``|<target|state>|^2`` for normalized vectors (any matching shape)."""
    state = np.asarray(state, dtype=complex).ravel()
    target = np.asarray(target, dtype=complex).ravel()
    for name, v in (("state", state), ("target", target)):
        n = np.vdot(v, v).real
        if abs(n - 1) > 1e-8:
            raise NormalizationError(f"{name} is not normalized (norm^2 = {n:.10f})")
    return float(abs(np.vdot(target, state)) ** 2)


def rwa_builder(schedule: PulseSchedule, couplings: CouplingSet, detuning: float = 0.0, with_g_factors: bool = False):
    return lambda t: build_h4l(schedule, detuning, couplings, t, with_g_factors)


def pre_rwa_builder(drive: ModulatedDrive, couplings: CouplingSet, chi: str = "exact"):
    return lambda t: build_pre_rwa(drive, couplings, t, chi)
