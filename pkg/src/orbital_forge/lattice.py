"""Unit system, lattice configuration and the driven 2D lattice potential.

Natural units fix hbar = m = k = 1. The lattice depth is usually quoted as
``v = V0 / (hbar * omega)`` where ``omega = sqrt(2 V0 k^2 / m)`` is the
harmonic frequency of a single well, so ``V0 = 2 v^2`` and ``omega = 2 v``.
Times in the user-facing API are measured in units of 1/omega and energies
in hbar*omega; :class:`LatticeConfig` carries the conversion helpers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import constants

# Atomic masses in unified atomic mass units.
SPECIES_MASS_U = {
    "Cs133": 132.905451933,
    "Rb87": 86.909180527,
    "K40": 39.96399848,
    "Na23": 22.9897692820,
    "Li6": 6.0151228874,
}


class InvalidConfigError(ValueError):
    """Raised for unphysical or incomplete lattice configurations."""


@dataclass(frozen=True)
class LabUnits:
    wavelength_m: float
    atom_mass_kg: float

    @classmethod
    def from_species(cls, species: str, wavelength_nm: float) -> "LabUnits":
        try:
            mass_u = SPECIES_MASS_U[species]
        except KeyError:
            raise InvalidConfigError(
                f"unknown species {species!r}; known: {sorted(SPECIES_MASS_U)}"
            ) from None
        if wavelength_nm <= 0:
            raise InvalidConfigError(f"wavelength must be positive, got {wavelength_nm}")
        return cls(wavelength_nm * 1e-9, mass_u * constants.atomic_mass)

    @property
    def k(self) -> float:
        """Primary-lattice wavenumber in 1/m."""
        return 2 * math.pi / self.wavelength_m

    @property
    def energy_unit_J(self) -> float:
        """Natural energy unit hbar^2 k^2 / m (twice the recoil energy)."""
        return constants.hbar**2 * self.k**2 / self.atom_mass_kg

    @property
    def frequency_unit(self) -> float:
        """Natural angular-frequency unit hbar k^2 / m in rad/s."""
        return constants.hbar * self.k**2 / self.atom_mass_kg

    @property
    def time_unit_s(self) -> float:
        return 1.0 / self.frequency_unit


@dataclass(frozen=True)
class LatticeConfig:
    """Dimensionless lattice parameters (hbar = m = k = 1).

    Attributes
    ----------
    v : float
        Depth in units of hbar*omega.
    V0 : float
        Depth in natural units, ``2 v**2``.
    omega : float
        Harmonic frequency of one well, ``sqrt(2 V0)``.
    k, k_s : float
        Primary and rotated-lattice wavenumbers (``k_s = sqrt(2) k``).
    ell : float
        Lattice constant lambda/4; one site spans ``[-ell, ell)``.
    lab : LabUnits or None
        Optional SI data for :func:`to_experimental`.
    """

    v: float
    V0: float
    omega: float
    k: float = 1.0
    k_s: float = math.sqrt(2.0)
    ell: float = math.pi / 2
    lab: LabUnits | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.V0 > 0:
            raise InvalidConfigError(f"lattice depth must be positive (blue detuned), got V0={self.V0}")

    # user-facing unit helpers
    def time(self, t_inv_omega: float) -> float:
        """Convert a time given in units of 1/omega to natural units."""
        return t_inv_omega / self.omega

    def in_inv_omega(self, t: float) -> float:
        return t * self.omega

    def freq(self, f_omega: float) -> float:
        """Convert a frequency given in units of omega to natural units."""
        return f_omega * self.omega

    def in_omega(self, f: float) -> float:
        return f / self.omega

    @property
    def recoil_energy(self) -> float:
        """E_r = hbar^2 k^2 / 2m in natural units."""
        return 0.5 * self.k**2

    @property
    def depth_in_recoils(self) -> float:
        return self.V0 / self.recoil_energy


def derive_units(v: float, lab: LabUnits | None = None) -> LatticeConfig:
    """Build a :class:`LatticeConfig` from the depth ``v = V0/(hbar omega)``."""
    if not (v > 0 and math.isfinite(v)):
        raise InvalidConfigError(f"depth v must be a positive number, got {v}")
    V0 = 2.0 * v * v
    return LatticeConfig(v=v, V0=V0, omega=math.sqrt(2.0 * V0), lab=lab)


class PhysicalDrive:
    """Lab-frame controls: x-amplitude modulation ``f_x`` and rotated-lattice depth ``V_c``.

    The base class is the undriven lattice. Subclasses override :meth:`f_x` and
    :meth:`V_c`; both accept scalars or numpy arrays of times (natural units).
    """

    omega_x: float = 0.0

    def f_x(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def V_c(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class CallableDrive(PhysicalDrive):
    """Drive assembled from two arbitrary callables."""

    fx: Callable
    vc: Callable
    omega_x: float = 0.0

    def f_x(self, t):
        return self.fx(t)

    def V_c(self, t):
        return self.vc(t)


def potential(x, y, t, config: LatticeConfig, drive: PhysicalDrive | None = None):
    """Driven lattice potential with the global ``+V_c(t)`` offset dropped.

    ``[V0 + f_x(t)] sin^2(kx) + V0 sin^2(ky) - V_c(t) cos(2kx) cos(2ky)``
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    k = config.k
    if drive is None:
        fx = vc = 0.0
    else:
        fx = drive.f_x(t)
        vc = drive.V_c(t)
    return (
        (config.V0 + fx) * np.sin(k * x) ** 2
        + config.V0 * np.sin(k * y) ** 2
        - vc * np.cos(2 * k * x) * np.cos(2 * k * y)
    )


def potential_rotated_form(x, y, t, config: LatticeConfig, drive: PhysicalDrive | None = None):
    """Same potential written with the two rotated standing waves (offset kept)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    k, ks = config.k, config.k_s
    fx = drive.f_x(t) if drive is not None else 0.0
    vc = drive.V_c(t) if drive is not None else 0.0
    return (
        (config.V0 + fx) * np.sin(k * x) ** 2
        + config.V0 * np.sin(k * y) ** 2
        + vc * (np.sin(ks * (x + y) / math.sqrt(2)) ** 2 + np.sin(ks * (x - y) / math.sqrt(2)) ** 2)
    )


@dataclass(frozen=True)
class LabReport:
    depth_in_recoils: float
    omega_rad_s: float
    f_drive_Hz: float
    T_ms: float

    def as_dict(self) -> dict:
        return {
            "depth_in_recoils": self.depth_in_recoils,
            "omega_rad_s": self.omega_rad_s,
            "f_drive_Hz": self.f_drive_Hz,
            "T_ms": self.T_ms,
        }


def to_experimental(config: LatticeConfig, omega_d: float, T: float) -> LabReport:
    """Convert the resonance frequency and duration (natural units) to SI.

    ``omega_d`` is an angular frequency and ``T`` a time, both in natural
    units; the drive frequency is reported as ``omega_d / 2pi`` in Hz.
    """
    if config.lab is None:
        raise InvalidConfigError("lab units (wavelength, atom mass) are required for conversion")
    w = config.lab.frequency_unit
    return LabReport(
        depth_in_recoils=config.depth_in_recoils,
        omega_rad_s=config.omega * w,
        f_drive_Hz=omega_d * w / (2 * math.pi),
        T_ms=T / w * 1e3,
    )


def from_experimental(config: LatticeConfig, report: LabReport) -> tuple[float, float]:
    """Inverse of :func:`to_experimental`: returns ``(omega_d, T)`` in natural units."""
    if config.lab is None:
        raise InvalidConfigError("lab units (wavelength, atom mass) are required for conversion")
    w = config.lab.frequency_unit
    return 2 * math.pi * report.f_drive_Hz / w, report.T_ms * 1e-3 * w
