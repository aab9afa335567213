"""Split-operator solver for one periodic lattice cell ``[-ell, ell)^2``.

The wavefunction is sampled on an ``N x N`` grid and normalized so that
``sum(|psi|^2) dx dy = 1``. Real-time steps are Strang splits
``exp(-i K dt/2) exp(-i V dt) exp(-i K dt/2)`` with the driven potential
frozen at the midpoint of each step; consecutive kinetic half-steps are
fused into one multiply in momentum space.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy import fft

from .lattice import LatticeConfig, PhysicalDrive
from .spectral import EigenBasis1D

_WORKERS = int(os.environ.get("ORBITAL_FORGE_THREADS", "1"))

OBSERVABLE_COLUMNS = ("t", "P00", "P20", "P02", "P22", "P40", "P04", "leakage", "fidelity", "Lz")


class GridMismatchError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


class StepSizeError(ValueError):
    pass


@dataclass(frozen=True)
class Grid2D:
    n: int
    ell: float = math.pi / 2
    x: np.ndarray = field(init=False, repr=False)
    k: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 64 or self.n & (self.n - 1):
            raise ValueError(f"grid size must be a power of two >= 64, got {self.n}")
        L = 2 * self.ell
        object.__setattr__(self, "x", -self.ell + L * np.arange(self.n) / self.n)
        object.__setattr__(self, "k", 2 * np.pi * fft.fftfreq(self.n, d=L / self.n))

    @property
    def dx(self) -> float:
        return 2 * self.ell / self.n

    @property
    def cell_area(self) -> float:
        return self.dx**2

    def kinetic(self) -> np.ndarray:
        return 0.5 * (self.k[:, None] ** 2 + self.k[None, :] ** 2)


@dataclass
class WaveField2D:
    """Complex wavefunction on a :class:`Grid2D`; axis 0 is x, axis 1 is y."""

    values: np.ndarray
    grid: Grid2D

    def norm(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.cell_area)

    def normalized(self) -> "WaveField2D":
        return WaveField2D(self.values / math.sqrt(self.norm()), self.grid)

    def copy(self) -> "WaveField2D":
        return WaveField2D(self.values.copy(), self.grid)

    @classmethod
    def product(cls, basis: EigenBasis1D, i: int, j: int) -> "WaveField2D":
        grid = Grid2D(len(basis.x))
        return cls(np.outer(basis.gammas[i], basis.gammas[j]).astype(complex), grid)

    @classmethod
    def superposition(cls, basis: EigenBasis1D, amplitudes: dict) -> "WaveField2D":
        """``sum c_ij Gamma_i(x) Gamma_j(y)`` from ``{(i, j): c_ij}``."""
        grid = Grid2D(len(basis.x))
        vals = np.zeros((grid.n, grid.n), dtype=complex)
        for (i, j), c in amplitudes.items():
            vals += c * np.outer(basis.gammas[i], basis.gammas[j])
        return cls(vals, grid)


def static_potential(grid: Grid2D, config: LatticeConfig) -> np.ndarray:
    s2 = np.sin(config.k * grid.x) ** 2
    return config.V0 * (s2[:, None] + s2[None, :])


def energy(psi: WaveField2D, config: LatticeConfig, V: np.ndarray | None = None) -> float:
    """``<psi|H|psi> / <psi|psi>`` with a spectral kinetic term."""
    g = psi.grid
    if V is None:
        V = static_potential(g, config)
    phi = psi.values
    kin = fft.ifft2(g.kinetic() * fft.fft2(phi, workers=_WORKERS), workers=_WORKERS)
    num = np.vdot(phi, kin + V * phi).real
    return float(num / np.vdot(phi, phi).real)


def ground_state_imaginary_time(
    config: LatticeConfig,
    grid: Grid2D,
    tolerance: float = 1e-12,
    taus: tuple[float, ...] = (2e-2, 4e-3, 1e-3),
    max_steps: int = 200_000,
    check_every: int = 50,
) -> WaveField2D:
    """Lowest eigenstate of the static lattice cell by imaginary-time Strang steps.

    Starts from the harmonic-oscillator Gaussian and runs each ``tau`` stage
    until the energy changes by less than ``tolerance`` between checks.
    Raises :class:`ConvergenceError` if ``max_steps`` is exhausted.
    """
    x = grid.x
    w = config.omega
    phi = np.exp(-0.5 * w * (x[:, None] ** 2 + x[None, :] ** 2)).astype(complex)
    psi = WaveField2D(phi, grid).normalized()
    V = static_potential(grid, config)
    K = grid.kinetic()
    steps = 0
    for tau in taus:
        half_v = np.exp(-0.5 * tau * V)
        kin = np.exp(-tau * K)
        e_old = energy(psi, config, V)
        phi = psi.values
        while True:
            for _ in range(check_every):
                phi = half_v * phi
                phi = fft.ifft2(kin * fft.fft2(phi, workers=_WORKERS), workers=_WORKERS)
                phi = half_v * phi
                phi /= math.sqrt(np.sum(np.abs(phi) ** 2) * grid.cell_area)
            steps += check_every
            psi = WaveField2D(phi, grid)
            e_new = energy(psi, config, V)
            if abs(e_new - e_old) < tolerance:
                break
            if steps >= max_steps:
                raise ConvergenceError(
                    f"imaginary-time evolution did not converge in {max_steps} steps; "
                    f"energy residual {abs(e_new - e_old):.3e}"
                )
            e_old = e_new
    # real ground state; drop the accumulated numerical imaginary part
    vals = psi.values
    vals = vals * np.exp(-1j * np.angle(vals[grid.n // 2, grid.n // 2]))
    return WaveField2D(vals.real.astype(complex), grid).normalized()


def _check_grid(psi: WaveField2D, basis: EigenBasis1D):
    if len(basis.x) != psi.grid.n or abs(basis.dx - psi.grid.dx) > 1e-14:
        raise GridMismatchError(
            f"eigenbasis grid ({len(basis.x)} points) does not match wavefunction grid ({psi.grid.n} points)"
        )


def amplitudes(psi: WaveField2D, basis: EigenBasis1D, levels=(0, 2, 4)) -> np.ndarray:
    """Matrix ``A[a, b] = <Gamma_levels[a](x) Gamma_levels[b](y) | psi>``."""
    _check_grid(psi, basis)
    G = basis.gammas[list(levels)]
    return G @ psi.values @ G.T * psi.grid.cell_area


def project(psi: WaveField2D, i: int, j: int, basis: EigenBasis1D) -> complex:
    """``<ij|psi>`` by 2D quadrature."""
    _check_grid(psi, basis)
    return complex(basis.gammas[i] @ psi.values @ basis.gammas[j] * psi.grid.cell_area)


def leakage(psi: WaveField2D, basis: EigenBasis1D) -> tuple[float, float, float]:
    """Population outside span{|00>, |20>, |02>, |22>}, plus P40 and P04."""
    A = amplitudes(psi, basis)
    P = np.abs(A) ** 2
    inside = P[0, 0] + P[1, 0] + P[0, 1] + P[1, 1]
    return float(psi.norm() - inside), float(P[2, 0]), float(P[0, 2])


def angular_momentum(psi: WaveField2D) -> float:
    """``<psi| x p_y - y p_x |psi>`` in units of hbar (spectral derivatives)."""
    g = psi.grid
    phi = psi.values
    dphi_dx = fft.ifft(1j * g.k[:, None] * fft.fft(phi, axis=0), axis=0)
    dphi_dy = fft.ifft(1j * g.k[None, :] * fft.fft(phi, axis=1), axis=1)
    x = g.x[:, None]
    y = g.x[None, :]
    lz = -1j * (x * dphi_dy - y * dphi_dx)
    return float(np.vdot(phi, lz).real * g.cell_area / psi.norm())


def observables(psi: WaveField2D, basis: EigenBasis1D, t: float = 0.0, with_lz: bool = True) -> dict:
    A = amplitudes(psi, basis)
    P = np.abs(A) ** 2
    plus = (A[1, 0] - 1j * A[0, 1]) / math.sqrt(2)
    inside = P[0, 0] + P[1, 0] + P[0, 1] + P[1, 1]
    return {
        "t": t,
        "P00": float(P[0, 0]),
        "P20": float(P[1, 0]),
        "P02": float(P[0, 1]),
        "P22": float(P[1, 1]),
        "P40": float(P[2, 0]),
        "P04": float(P[0, 2]),
        "leakage": float(psi.norm() - inside),
        "fidelity": float(abs(plus) ** 2),
        "Lz": angular_momentum(psi) if with_lz else float("nan"),
    }


@dataclass
class Trajectory2D:
    """Observables sampled during a propagation, one dict per sample."""

    samples: list[dict]
    final: WaveField2D
    dt: float
    n_steps: int
    max_norm_drift: float

    def column(self, name: str) -> np.ndarray:
        return np.array([s[name] for s in self.samples])

    @property
    def times(self) -> np.ndarray:
        return self.column("t")


def propagate_split_operator(
    psi: WaveField2D,
    drive: PhysicalDrive,
    config: LatticeConfig,
    dt: float,
    T: float,
    sample_times=None,
    basis: EigenBasis1D | None = None,
    omega_d: float | None = None,
    with_lz: bool = True,
) -> Trajectory2D:
    """Real-time propagation from 0 to ``T`` (natural units).

    ``dt`` is rounded down so that ``T`` is an integer number of steps;
    ``sample_times`` are snapped to the nearest step. ``omega_d`` (default:
    ``basis.omega_d``) enforces ``omega_d * dt <= 0.1``.
    """
    g = psi.grid
    if omega_d is None and basis is not None:
        omega_d = basis.omega_d
    if omega_d is not None and omega_d * dt > 0.1 + 1e-12:
        raise StepSizeError(
            f"omega_d*dt = {omega_d * dt:.3f} exceeds 0.1; use dt <= {0.1 / omega_d:.5f} (suggest {0.05 / omega_d:.5f})"
        )
    n_steps = max(1, int(math.ceil(T / dt - 1e-9)))
    dt = T / n_steps
    if sample_times is None:
        sample_idx = np.array([0, n_steps])
    else:
        sample_idx = np.unique(np.clip(np.rint(np.asarray(sample_times) / dt).astype(int), 0, n_steps))
    sample_set = set(int(i) for i in sample_idx)

    x = g.x
    V_static = static_potential(g, config)
    sx = (np.sin(config.k * x) ** 2)[:, None]
    cc = np.cos(2 * config.k * x)[:, None] * np.cos(2 * config.k * x)[None, :]
    K = g.kinetic()
    kin_half = np.exp(-0.5j * dt * K)
    kin_full = kin_half**2

    mid = (np.arange(n_steps) + 0.5) * dt
    fx = np.asarray(drive.f_x(mid), dtype=float) * np.ones(n_steps)
    vc = np.asarray(drive.V_c(mid), dtype=float) * np.ones(n_steps)

    phi = psi.values.astype(complex, copy=True)
    norm0 = float(np.sum(np.abs(phi) ** 2) * g.cell_area)
    max_drift = 0.0
    samples = []

    def record(step, phi):
        nonlocal max_drift
        field_ = WaveField2D(phi, g)
        max_drift = max(max_drift, abs(field_.norm() - norm0))
        if basis is not None:
            samples.append(observables(field_, basis, t=step * dt, with_lz=with_lz))
        else:
            samples.append({"t": step * dt, "norm": field_.norm()})

    if 0 in sample_set:
        record(0, phi)
    # kinetic half-steps of neighbouring steps are fused unless a sample sits between them
    pending = kin_half
    for n in range(n_steps):
        phi = fft.ifft2(pending * fft.fft2(phi, workers=_WORKERS), workers=_WORKERS)
        phi = np.exp(-1j * dt * (V_static + fx[n] * sx - vc[n] * cc)) * phi
        step = n + 1
        if step in sample_set or step == n_steps:
            phi = fft.ifft2(kin_half * fft.fft2(phi, workers=_WORKERS), workers=_WORKERS)
            if step in sample_set:
                record(step, phi)
            pending = kin_half
        else:
            pending = kin_full
    final = WaveField2D(phi, g)
    max_drift = max(max_drift, abs(final.norm() - norm0))
    return Trajectory2D(samples=samples, final=final, dt=dt, n_steps=n_steps, max_norm_drift=max_drift)
