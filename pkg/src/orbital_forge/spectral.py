"""Site eigenfunctions of the 1D lattice ``-1/2 d^2/dx^2 + V0 sin^2(x)``.

The states are the q = 0 Bloch functions of one period ``[-ell, ell)``,
obtained in a parity-adapted plane-wave basis: even states expand in
``{1, cos 2mx}`` and odd states in ``{sin 2mx}``. Both blocks are
tridiagonal, so the diagonalisation is a pair of ``eigh_tridiagonal`` calls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .lattice import LatticeConfig


class NumericalError(RuntimeError):
    pass


class InsufficientStatesError(ValueError):
    pass


@dataclass(frozen=True)
class EigenBasis1D:
    """Site eigenfunctions sampled on ``M`` points of ``[-ell, ell)``.

    ``gammas[n]`` is real with ``sum(gammas[n]**2) * dx == 1``.
    ``coeffs[n]`` holds the plane-wave coefficients (cos or sin series,
    selected by ``parities[n]``) so states can be re-evaluated on other grids.
    """

    x: np.ndarray
    gammas: np.ndarray
    energies: np.ndarray
    parities: tuple[str, ...]
    coeffs: np.ndarray
    omega_d: float
    V0: float

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def n_states(self) -> int:
        return len(self.energies)

    def evaluate(self, n: int, x) -> np.ndarray:
        """Evaluate ``Gamma_n`` at arbitrary positions (periodic continuation)."""
        return _series(self.coeffs[n], self.parities[n], x)

    def overlap(self, f: np.ndarray, i: int, j: int) -> float:
        """Quadrature ``<Gamma_i | f | Gamma_j>`` on the sampling grid."""
        return float(np.sum(self.gammas[i] * f * self.gammas[j]) * self.dx)


def _series(c: np.ndarray, parity: str, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    m = np.arange(len(c))
    if parity == "even":
        basis = np.cos(2 * np.multiply.outer(x, m)) * math.sqrt(2 / math.pi)
        basis[..., 0] = 1 / math.sqrt(math.pi)
    else:
        basis = np.sin(2 * np.multiply.outer(x, m + 1)) * math.sqrt(2 / math.pi)
    return basis @ c


def _blocks(V0: float, n_pw: int):
    """Diagonal and off-diagonal entries of the even and odd Hamiltonian blocks."""
    m = np.arange(n_pw)
    even_d = 2.0 * m**2 + V0 / 2
    even_e = np.full(n_pw - 1, -V0 / 4)
    even_e[0] = -V0 * math.sqrt(2) / 4
    odd_m = m + 1
    odd_d = 2.0 * odd_m**2 + V0 / 2
    odd_e = np.full(n_pw - 1, -V0 / 4)
    return (even_d, even_e), (odd_d, odd_e)


def solve_site_states(config: LatticeConfig, m_grid: int = 128, n_states: int = 6) -> EigenBasis1D:
    """Lowest ``n_states`` q = 0 eigenpairs of one lattice period.

    The plane-wave cutoff follows the sampling grid (``|2m| < m_grid``), so the
    returned states are eigenstates of the Fourier-grid Hamiltonian used by the
    2D solver on the same number of points.
    """
    if m_grid < 64:
        raise ValueError(f"m_grid must be >= 64, got {m_grid}")
    if n_states < 5:
        raise ValueError(f"n_states must be >= 5, got {n_states}")
    n_pw = m_grid // 2 - 1
    if n_states > 2 * n_pw:
        raise ValueError("n_states exceeds the plane-wave basis size")
    (ed, ee), (od, oe) = _blocks(config.V0, n_pw)
    n_each = min(n_pw, n_states)
    ew, ev = eigh_tridiagonal(ed, ee, select="i", select_range=(0, n_each - 1))
    ow, ov = eigh_tridiagonal(od, oe, select="i", select_range=(0, n_each - 1))

    energies = np.concatenate([ew, ow])
    vecs = [ev[:, i] for i in range(n_each)] + [ov[:, i] for i in range(n_each)]
    parity = ["even"] * n_each + ["odd"] * n_each
    order = np.argsort(energies, kind="stable")[:n_states]

    tail = max(abs(vecs[i][-1]) for i in order)
    if tail > 1e-10:
        raise NumericalError(
            f"plane-wave expansion not converged: tail coefficient {tail:.2e} "
            f"with {n_pw} plane waves; increase m_grid"
        )

    ell = config.ell
    x = -ell + 2 * ell * np.arange(m_grid) / m_grid
    coeffs = []
    for i in order:
        c = vecs[i].copy()
        c = _fix_sign(c, parity[i])
        coeffs.append(c)
    coeffs = np.array(coeffs)
    par = tuple(parity[i] for i in order)
    gammas = np.array([_series(c, p, x) for c, p in zip(coeffs, par)])
    return EigenBasis1D(
        x=x,
        gammas=gammas,
        energies=energies[order],
        parities=par,
        coeffs=coeffs,
        omega_d=float(energies[order][2] - energies[order][0]),
        V0=config.V0,
    )


def _fix_sign(c: np.ndarray, parity: str) -> np.ndarray:
    # even: Gamma(0) > 0, odd: Gamma'(0) > 0
    if parity == "even":
        s = c[0] / math.sqrt(math.pi) + math.sqrt(2 / math.pi) * c[1:].sum()
    else:
        s = np.sum(c * (np.arange(len(c)) + 1))
    return -c if s < 0 else c


def count_bound_states(basis: EigenBasis1D, config: LatticeConfig) -> int:
    """Number of site states below the barrier top ``V0``."""
    if basis.energies[-1] < config.V0:
        raise InsufficientStatesError(
            f"all {basis.n_states} computed states lie below V0={config.V0:g}; "
            "request more states"
        )
    return int(np.sum(basis.energies < config.V0))
