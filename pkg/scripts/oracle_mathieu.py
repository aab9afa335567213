"""Independent oracle for site states, couplings and band-2 hopping.

Uses scipy's Mathieu functions and adaptive quadrature, sharing no code with
the package. With ``x = u + pi/2`` the site equation becomes the Mathieu
equation ``y'' + (a - 2q cos 2u) y = 0`` with ``a = 2E - V0`` and ``q = V0/2``.
Run once; the printed numbers are frozen into ``tests/oracle_values.py``.
"""

import math
import sys

import numpy as np
from scipy.integrate import quad
from scipy.special import mathieu_a, mathieu_b, mathieu_cem


def site_state(m, q):
    raw = lambda x: mathieu_cem(m, q, np.degrees(x - np.pi / 2))[0]
    norm = quad(lambda x: raw(x) ** 2, -np.pi / 2, np.pi / 2, epsabs=1e-15, limit=200)[0]
    sign = np.sign(raw(0.0))
    return lambda x: sign * raw(x) / math.sqrt(norm)


def integral(f):
    return quad(f, -np.pi / 2, np.pi / 2, epsabs=1e-15, epsrel=1e-13, limit=200)[0]


def oracle(v):
    V0 = 2 * v * v
    q = V0 / 2
    g0, g2 = site_state(0, q), site_state(2, q)
    c00 = integral(lambda x: g0(x) ** 2 * np.cos(2 * x))
    c22 = integral(lambda x: g2(x) ** 2 * np.cos(2 * x))
    c02 = integral(lambda x: g0(x) * g2(x) * np.cos(2 * x))
    return {
        "omega_d": (mathieu_a(2, q) - mathieu_a(0, q)) / 2,
        "alpha0": integral(lambda x: g0(x) ** 2 * np.sin(x) ** 2),
        "alpha2": integral(lambda x: g2(x) ** 2 * np.sin(x) ** 2),
        "beta0": c00,
        "beta2": c22,
        "gamma0": integral(lambda x: g0(x) * g2(x) * np.sin(x) ** 2),
        "gamma1": c02**2,
        "gamma2": c00 * c02,
        "gamma3": c02 * c22,
        # cosine-band estimate of the band-2 nearest-neighbour hopping, in omega units
        "J2_over_omega": (mathieu_b(3, q) - mathieu_a(2, q)) / 8 / (2 * v),
    }


if __name__ == "__main__":
    depths = [float(a) for a in sys.argv[1:]] or [3.0, 3.5, 4.0]
    for v in depths:
        print(f"{v}: {{")
        for k, val in oracle(v).items():
            print(f"    {k!r}: {float(val)!r},")
        print("},")
