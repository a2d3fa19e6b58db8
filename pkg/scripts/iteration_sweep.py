"""Error, DoF and NoLP of LSSI and LKSI bases as the iteration count grows.

    python scripts/iteration_sweep.py [--quick] [--out results/iteration]
"""
import argparse
from pathlib import Path

from lsi_parabolic.cli import Experiment, load_config, run_sweep

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=ROOT / "results" / "iteration")
    ap.add_argument("--kmax", type=int, default=6)
    ap.add_argument("--quick", action="store_true", help="5x5 coarse grid, m=2")
    args = ap.parse_args()

    cfg = load_config(ROOT / "configs" / "iteration_sweep.cfg")
    cfg = cfg.with_value("sweep.values", tuple(range(1, args.kmax + 1)))
    if args.quick:
        cfg = cfg.with_value("grid.nc", 5).with_value("grid.r", 6).with_value("basis.m", 2)
    exp = Experiment(parallel=True)  # shares the fine reference between methods
    print(f"{'method':6s} {'k':>2s} {'DoF':>5s} {'NoLP':>5s} {'energy':>10s} {'L2':>10s} {'CPU[s]':>7s}")
    for method in ("lssi", "lksi"):
        rows = run_sweep(cfg.with_value("basis.method", method), args.out / method, exp)
        for r in rows:
            print(f"{method:6s} {r['k']:2d} {r['dof']:5d} {r['nolp']:5d} {r['energy_error']:10.3e} "
                  f"{r['l2_error']:10.3e} {r['basis_seconds']:7.2f}")


if __name__ == "__main__":
    main()
