"""Step-halving and grid-doubling checks on the final fidelity of the full scheme.

Usage: python scripts/convergence.py [--total-time 750] [--ts-fraction 0.25]
"""

import argparse

from orbital_forge.experiments import Profile, run_2d


def final_fidelity(T: float, ts: float, grid_n: int, dt_factor: float) -> float:
    return run_2d(3.0, T, ts, 0.0, Profile(grid_n, dt_factor, 2, with_lz=False)).samples[-1]["fidelity"]


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--total-time", type=float, default=750.0)
    ap.add_argument("--ts-fraction", type=float, default=0.25)
    args = ap.parse_args()
    T, ts = args.total_time, args.ts_fraction
    base = final_fidelity(T, ts, 128, 0.05)
    half = final_fidelity(T, ts, 128, 0.025)
    fine = final_fidelity(T, ts, 256, 0.05)
    print(f"N=128 dt: {base:.10f}")
    print(f"N=128 dt/2: {half:.10f}  change {abs(half - base):.2e} (target < 1e-6)")
    print(f"N=256 dt: {fine:.10f}  change {abs(fine - base):.2e} (target < 1e-4)")
