"""Overlap coefficients and phase factors of the four-level reduction.

All integrals run over one site ``[-ell, ell)`` on the eigenbasis grid. The
grid is periodic and the integrands are smooth trigonometric series, so the
rectangle rule is spectrally accurate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import jv

from .spectral import EigenBasis1D


@dataclass(frozen=True)
class CouplingSet:
    """Scalar couplings between the site states Gamma_0 and Gamma_2.

    ``c00, c02, c22`` are the cos(2kx) matrix elements; ``beta0 = c00``,
    ``beta2 = c22``, ``gamma1 = c02**2``, ``gamma2 = c00*c02``,
    ``gamma3 = c02*c22``. ``gamma0`` is the sin^2(kx) matrix element between
    Gamma_0 and Gamma_2 and ``A02 = (alpha0 - alpha2) / omega_d``.
    """

    alpha0: float
    alpha2: float
    beta0: float
    beta2: float
    gamma0: float
    gamma1: float
    gamma2: float
    gamma3: float
    A02: float
    omega_d: float
    c02: float

    def alpha(self, n: int) -> float:
        return {0: self.alpha0, 2: self.alpha2}[n]

    def beta(self, n: int) -> float:
        return {0: self.beta0, 2: self.beta2}[n]

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def compute_overlaps(basis: EigenBasis1D) -> CouplingSet:
    x = basis.x
    s2 = np.sin(x) ** 2
    c2 = np.cos(2 * x)
    alpha0 = basis.overlap(s2, 0, 0)
    alpha2 = basis.overlap(s2, 2, 2)
    c00 = basis.overlap(c2, 0, 0)
    c22 = basis.overlap(c2, 2, 2)
    c02 = basis.overlap(c2, 0, 2)
    return CouplingSet(
        alpha0=alpha0,
        alpha2=alpha2,
        beta0=c00,
        beta2=c22,
        gamma0=basis.overlap(s2, 0, 2),
        gamma1=c02**2,
        gamma2=c00 * c02,
        gamma3=c02 * c22,
        A02=(alpha0 - alpha2) / basis.omega_d,
        omega_d=basis.omega_d,
        c02=c02,
    )


def chi_phase(n: int, m: int, couplings: CouplingSet, int_fx, int_vc):
    """Diagonal dressing phase of ``|nm>``.

    ``exp{-i [alpha_n * int_fx - beta_n beta_m * int_vc]}`` where the two
    arguments are the running integrals of ``f_x`` and ``V_c`` (scalars or
    arrays). See :meth:`orbital_forge.pulses.Drive.int_fx` for the exact and
    slow-envelope forms of ``int_fx``.
    """
    a = couplings.alpha(n)
    bb = couplings.beta(n) * couplings.beta(m)
    return np.exp(-1j * (a * np.asarray(int_fx) - bb * np.asarray(int_vc)))


def chi_tilde(idx: tuple[int, int, int, int], couplings: CouplingSet, int_fx, int_vc):
    """``conj(chi_{n,m}) * chi_{p,q}`` for ``idx = (n, m, p, q)``."""
    n, m, p, q = idx
    return np.conj(chi_phase(n, m, couplings, int_fx, int_vc)) * chi_phase(p, q, couplings, int_fx, int_vc)


def g_factor(idx: tuple[int, int, int, int], couplings: CouplingSet, int_vc):
    """``exp[i (beta_p beta_q - beta_n beta_m) * int_vc]`` for ``idx = (n, m, p, q)``."""
    n, m, p, q = idx
    b = couplings.beta
    return np.exp(1j * (b(p) * b(q) - b(n) * b(m)) * np.asarray(int_vc))


def jacobi_anger_check(A02: float, g_max: float) -> dict:
    """Bessel truncation diagnostics for the argument ``A02 * g_max``."""
    z = A02 * g_max
    return {
        "j0_deficit": float(1.0 - jv(0, z)),
        "j1_mag": float(abs(jv(1, z))),
        "j2_mag": float(abs(jv(2, z))),
    }


def g_phase_diagnostic(couplings: CouplingSet, vc_max: float) -> float:
    """``|(beta_0 beta_0 - beta_2 beta_0) * V_c,max| / omega_d``.

    The smallness condition that lets the G factors survive the rotating-wave
    step; values well below one mean the G phase is slow on the drive scale.
    """
    b0, b2 = couplings.beta0, couplings.beta2
    return abs((b0 * b0 - b2 * b0) * vc_max) / couplings.omega_d
