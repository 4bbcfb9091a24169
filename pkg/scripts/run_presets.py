"""Run built-in presets end to end and print a one-line summary for each.

Usage:
    python scripts/run_presets.py                 # every preset
    python scripts/run_presets.py growth-1d-chi1  # just these
    python scripts/run_presets.py --out results   # change output root

Each preset writes run_log.csv, snapshot CSVs and plot.gp under
<out>/<preset>/.  A diverged run is reported, not fatal: the partial
trajectory is still written.
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from meshless_growth import (  # noqa: E402
    PRESET_NAMES,
    get_preset,
    run,
)
from meshless_growth.output import (  # noqa: E402
    write_plot_script,
    write_run_log,
    write_snapshots,
)


def run_one(name: str, out_root: Path) -> str:
    sc = get_preset(name)
    cloud = sc.cloud.build()
    table = sc.star.build_table(cloud)
    t0 = time.perf_counter()
    traj = run(cloud, table, sc.model, sc.initial_state(cloud), sc.scheme)
    wall = time.perf_counter() - t0
    out = out_root / name
    write_run_log(traj, out)
    write_snapshots(traj, out)
    write_plot_script(traj, out)
    last = traj.log[-1]
    status = "ok"
    if traj.diverged is not None:
        status = f"DIVERGED step {traj.diverged.step} t={traj.diverged.time:.4g}"
    return (f"{name:24s} {cloud.n_nodes:4d} nodes  {last.step:7d} steps  "
            f"t_end={last.time:<8.4g} max_k={last.max_k:<12.6g} "
            f"{wall:6.2f}s  {status}")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("presets", nargs="*", default=list(PRESET_NAMES))
    ap.add_argument("--out", default="out")
    args = ap.parse_args(argv)
    names = args.presets or list(PRESET_NAMES)
    for name in names:
        print(run_one(name, Path(args.out)))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
