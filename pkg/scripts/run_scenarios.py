"""Run every CLI scenario on one config and collect the verdicts.

Usage: python scripts/run_scenarios.py scripts/configs/smoke.yaml --out runs/smoke [--only eigs sim2d]
"""

import argparse
import json
import sys
import time
from pathlib import Path

from orbital_forge.cli import COMMANDS, main


def run(config: str, out: Path, names) -> dict:
    verdicts = {}
    for name in names:
        t0 = time.perf_counter()
        code = main([name, "--config", config, "--out", str(out)])
        verdicts[name] = {"exit_code": code, "seconds": round(time.perf_counter() - t0, 1)}
    return verdicts


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--out", default="runs")
    ap.add_argument("--only", nargs="*", choices=sorted(COMMANDS))
    args = ap.parse_args()
    out = Path(args.out)
    verdicts = run(args.config, out, args.only or list(COMMANDS))
    out.mkdir(parents=True, exist_ok=True)
    (out / "verdicts.json").write_text(json.dumps(verdicts, indent=2, sort_keys=True) + "\n")
    print(json.dumps(verdicts, indent=2))
    sys.exit(max(v["exit_code"] for v in verdicts.values()))
