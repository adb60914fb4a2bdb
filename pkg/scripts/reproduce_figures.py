"""Run every recipe in recipes/ and write the data files to results/.

    python3 scripts/reproduce_figures.py [--only fig3 fig4] [--workers N] [--out results]

Each recipe's first line names its subcommand. A short text summary of the
features the figures are read for is printed at the end.
"""

import argparse
import pathlib
import sys
import time

import numpy as np
from scipy.signal import find_peaks

from kicked_rotor.cli import main as cli_main
from kicked_rotor.io import read_table

ROOT = pathlib.Path(__file__).resolve().parent.parent


def recipe_command(path):
    first = path.read_text().splitlines()[0].split()
    return first[2]


def scan_summary(path):
    rows = [line.split(",") for line in open(path) if not line.startswith("#")][1:]
    p = np.array([float(r[0]) for r in rows])
    e = np.array([float(r[1]) for r in rows])
    peaks = find_peaks(e)[0]
    return "maxima at p_i = " + ", ".join(f"{p[i]:.3f} (E {e[i]:.2f})" for i in peaks)


def profile_summary(path):
    _, c = read_table(path)
    p, d = c["momentum_recoils"], c["probability_density"]
    sel = np.abs(p - 1.0) < 1.0
    n = len(find_peaks(d[sel], prominence=0.05 * d[sel].max())[0])
    return f"{n} maxima in the order at p = 1"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--only", nargs="*", help="recipe names, e.g. fig3 fig3b")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default=str(ROOT / "results"))
    args = ap.parse_args(argv)

    recipes = sorted((ROOT / "recipes").glob("*.cfg"))
    if args.only:
        recipes = [r for r in recipes if r.stem in args.only]
    out_dir = pathlib.Path(args.out)
    summary = []
    for r in recipes:
        cmd = recipe_command(r)
        stem = out_dir / r.stem
        t0 = time.perf_counter()
        code = cli_main([cmd, "--config", str(r), "--workers", str(args.workers), "--out", str(stem)])
        if code:
            print(f"{r.stem}: exit {code}", file=sys.stderr)
            return code
        dt = time.perf_counter() - t0
        if cmd == "scan":
            summary.append(f"{r.stem:6s} {dt:6.1f}s  {scan_summary(f'{stem}.scan.csv')}")
        else:
            summary.append(f"{r.stem:6s} {dt:6.1f}s  {profile_summary(f'{stem}.profile.csv')}")
    print("\n".join(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
