"""Explicit-subspace Rayleigh quotient, stability limit and error as the contrast grows.

    python scripts/contrast_sweep.py [--quick] [--method lssi]
"""
import argparse
from pathlib import Path

from lsi_parabolic.cli import Experiment, load_config, run_sweep

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=ROOT / "results" / "contrast")
    ap.add_argument("--method", default="lksi", choices=["lssi", "lksi"])
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()

    cfg = load_config(ROOT / "configs" / "contrast_sweep.cfg").with_value("basis.method", args.method)
    if args.quick:
        cfg = cfg.with_value("grid.nc", 5).with_value("grid.r", 6).with_value("basis.m", 2)
    rows = run_sweep(cfg, args.out / args.method, Experiment(parallel=True))
    print(f"{'contrast':>9s} {'RQ':>10s} {'gamma':>9s} {'tau_max':>10s} {'energy':>10s}")
    for r in rows:
        print(f"{r['contrast']:9.0e} {r['rq']:10.1f} {r['gamma']:9.2e} {r['tau_max']:10.3e} {r['energy_error']:10.3e}")


if __name__ == "__main__":
    main()
