"""Final-time error against the number of oversampling layers m.

    python scripts/oversampling_sweep.py [--quick]
"""
import argparse
from pathlib import Path

import numpy as np

from lsi_parabolic.cli import Experiment, load_config, run_sweep

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=ROOT / "results" / "oversampling")
    ap.add_argument("--mmax", type=int, default=5)
    ap.add_argument("--method", default="lksi", choices=["lssi", "lksi"])
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()

    cfg = load_config(ROOT / "configs" / "oversampling_sweep.cfg")
    cfg = cfg.with_value("sweep.values", tuple(range(1, args.mmax + 1))).with_value("basis.method", args.method)
    if args.quick:
        # on 5x5 coarse cells m >= 4 makes every region the whole domain
        mmax = min(args.mmax, 3)
        cfg = cfg.with_value("grid.nc", 5).with_value("grid.r", 6).with_value("sweep.values", tuple(range(1, mmax + 1)))
    rows = run_sweep(cfg, args.out, Experiment(parallel=True))
    errs = np.array([r["energy_error"] for r in rows])
    for r in rows:
        print(f"m={r['m']}  energy={r['energy_error']:.3e}  L2={r['l2_error']:.3e}  delta_LSI={r['delta_lsi']:.3e}")
    if len(errs) > 1:
        rate = np.exp(np.polyfit([r["m"] for r in rows], np.log(errs), 1)[0])
        print(f"fitted decay per layer: {rate:.3f}")


if __name__ == "__main__":
    main()
