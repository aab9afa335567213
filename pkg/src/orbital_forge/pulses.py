"""Sequential pi / pi-2 Rabi envelopes and their lab-frame drives.

Envelopes are stored as polynomial pieces, so values, running integrals and
integrals against ``cos(omega t)`` are all exact; integrators can query any
time without interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .couplings import CouplingSet
from .lattice import PhysicalDrive


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class Envelope:
    """A nonnegative polynomial pulse supported on ``[start, stop]``."""

    poly: Polynomial
    start: float
    stop: float
    _anti: Polynomial = field(init=False, repr=False)

    def __post_init__(self):
        anti = self.poly.integ(lbnd=self.start)
        object.__setattr__(self, "_anti", anti)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= self.start) & (t <= self.stop)
        return np.where(inside, self.poly(t), 0.0)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= self.start) & (t <= self.stop)
        return np.where(inside, self.poly.deriv()(t), 0.0)

    def area(self) -> float:
        return float(self._anti(self.stop))

    def integral(self, t):
        """``int_0^t envelope(s) ds``."""
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, self.start, self.stop)
        return self._anti(tc)

    def integral_cos(self, t, omega: float):
        """Exact ``int_0^t envelope(s) cos(omega s) ds``.

        Repeated integration by parts terminates because the envelope is a
        polynomial.
        """
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, self.start, self.stop)
        if omega == 0:
            return self.integral(t)
        return self._prim_cos(tc, omega) - self._prim_cos(np.asarray(self.start), omega)

    def _prim_cos(self, s, omega):
        out = np.zeros_like(s, dtype=float)
        p = self.poly
        ws = omega * s
        # d/ds of the sum below is p(s) cos(omega s)
        trig = (np.sin(ws), np.cos(ws), -np.sin(ws), -np.cos(ws))
        for k in range(p.degree() + 1):
            out = out + p(s) * trig[k % 4] / omega ** (k + 1)
            p = p.deriv()
        return out


@dataclass(frozen=True)
class PulseSchedule:
    """Effective Rabi envelopes: a pi pulse in Omega_x then a pi/2 pulse in Omega_c."""

    T: float
    t_S: float
    omega_x_env: Envelope
    omega_c_env: Envelope

    def omega_x(self, t):
        return self.omega_x_env(t)

    def omega_c(self, t):
        return self.omega_c_env(t)


def make_sequential_schedule(T: float, t_S: float) -> PulseSchedule:
    """Quartic-bump envelopes with zero value and slope at both segment ends.

    ``Omega_x = 30 pi t^2 (t - t_S)^2 / t_S^5`` on ``[0, t_S]`` (area pi) and
    ``Omega_c = 15 pi (t - T)^2 (t - t_S)^2 / (T - t_S)^5`` on ``[t_S, T]``
    (area pi/2).
    """
    if not (0 < t_S < T):
        raise ScheduleError(f"switch time must satisfy 0 < t_S < T, got t_S={t_S}, T={T}")
    # stored in the scaled variable s = (t - start) / duration, so the endpoint
    # zeros are exact (no cancellation of large power-basis coefficients)
    bump = Polynomial([0, 0, 1, -2, 1])  # s^2 (1 - s)^2
    px = Polynomial(bump.coef * 30 * math.pi / t_S, domain=[0, t_S], window=[0, 1])
    pc = Polynomial(bump.coef * 15 * math.pi / (T - t_S), domain=[t_S, T], window=[0, 1])
    return PulseSchedule(T=T, t_S=t_S, omega_x_env=Envelope(px, 0.0, t_S), omega_c_env=Envelope(pc, t_S, T))


@dataclass(frozen=True)
class ModulatedDrive(PhysicalDrive):
    """Lab-frame drive for a schedule in the sequential case (hbar = 1).

    ``f_x(t) = Omega_x(t) cos(omega_x t) / gamma0`` and
    ``V_c(t) = Omega_c(t) / (2 gamma1)``.
    """

    schedule: PulseSchedule
    gamma0: float
    gamma1: float
    omega_x: float

    def g_x(self, t):
        return self.schedule.omega_x(t) / self.gamma0

    def f_x(self, t):
        return self.g_x(t) * np.cos(self.omega_x * np.asarray(t, dtype=float))

    def V_c(self, t):
        return self.schedule.omega_c(t) / (2 * self.gamma1)

    def int_fx(self, t):
        """Exact running integral of ``f_x``."""
        return self.schedule.omega_x_env.integral_cos(t, self.omega_x) / self.gamma0

    def int_fx_slow(self, t):
        """Slow-envelope form ``g_x(t) sin(omega_x t) / omega_x``."""
        t = np.asarray(t, dtype=float)
        return self.g_x(t) * np.sin(self.omega_x * t) / self.omega_x

    def int_vc(self, t):
        return self.schedule.omega_c_env.integral(t) / (2 * self.gamma1)

    def g_max(self) -> float:
        t = self.schedule.t_S / 2
        return float(abs(self.g_x(t)))

    def vc_max(self) -> float:
        s = self.schedule
        return float(self.V_c(0.5 * (s.t_S + s.T)))


def to_physical(schedule: PulseSchedule, couplings: CouplingSet, omega_x: float | None = None) -> ModulatedDrive:
    """Map Rabi envelopes to the lattice modulation; ``omega_x`` defaults to omega_d."""
    for name in ("gamma0", "gamma1"):
        val = getattr(couplings, name)
        if abs(val) < 1e-12:
            raise ZeroDivisionError(f"coupling {name}={val:.3e} vanishes; the drive would diverge")
    if omega_x is None:
        omega_x = couplings.omega_d
    return ModulatedDrive(schedule=schedule, gamma0=couplings.gamma0, gamma1=couplings.gamma1, omega_x=omega_x)
