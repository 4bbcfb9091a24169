"""Manufactured-solution convergence tables, spatial and temporal.

Usage:
    python scripts/convergence_tables.py [--levels 3] [--base1d 9] [--base2d 7]

Spatial: dt is slaved to h^2 so the spatial error dominates; the observed
slope should sit near 2.  Temporal: a fixed fine cloud and a Richardson-style
reference at dt_min/16 isolate the first-order Euler error.
"""

import argparse
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from meshless_growth import (  # noqa: E402
    convergence_study,
    generate_regular,
    regular_refinement,
    temporal_convergence_study,
)


def show(title: str, result, col: str) -> None:
    print(title)
    prev = None
    for h, err in result.levels:
        rate = ""
        if prev is not None and err > 0:
            rate = f"{math.log(prev[1] / err) / math.log(prev[0] / h):.3f}"
        print(f"  {col}={h:<12.6g} err={err:<12.6g} rate={rate}")
        prev = (h, err)
    for h in result.excluded:
        print(f"  {col}={h:<12.6g} excluded (diverged)")
    print(f"  fitted order: {result.observed_order:.4f}\n")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", type=int, default=3)
    ap.add_argument("--base1d", type=int, default=9)
    ap.add_argument("--base2d", type=int, default=9)
    args = ap.parse_args(argv)

    show("spatial, 1D (two-node stars)",
         convergence_study(regular_refinement(args.base1d, args.levels, dim=1), 2),
         "h")
    show("spatial, 2D (quadrant stars, s=8)",
         convergence_study(regular_refinement(args.base2d, args.levels, dim=2),
                           8, "quadrant"),
         "h")
    show("temporal, 1D (N=41 fixed)",
         temporal_convergence_study(generate_regular(41, 1.0, dim=1), 2,
                                    dts=(2e-4, 1e-4, 5e-5)),
         "dt")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
