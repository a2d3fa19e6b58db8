"""Command line driver: config parsing, experiment sweeps and CSV reports.

Config files are flat ``key = value`` lines with dotted keys::

    grid.nc = 10
    basis.method = lksi
    sweep.axis = oversampling
    sweep.values = 1..4      # or a comma list

Subcommands: ``basis``, ``solve``, ``sweep``, ``reference``, ``oracle``.
Exit status is 0 on success, 2 for configuration errors and 3 for numerical
failures.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .assembly import assemble, interpolate_free, restrict_local
from .coarse_space import BasisConfig, build_multiscale_space, cauchy_schwarz_gamma, explicit_rayleigh_quotient, split_space
from .errors import ConfigError, EmptySplit, NumericalError
from .exchange import load_space, save_space, save_split
from .fields import FIELD_KINDS, SourceSpec, generate_field, load_raster
from .grid import build_grid, overlap_count, oversample
from .local_basis import build_local_basis, local_eig_oracle
from .metrics import delta_lsi_estimate, error_series, write_csv_atomic, write_series_csv, write_trajectory_csv
from .timestep import SchemeConfig, solve_fine_reference, solve_implicit_coarse, solve_splitting, splitting_stability_limit

log = logging.getLogger("lsi_parabolic")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
SWEEP_AXES = ("none", "iter", "oversampling", "contrast", "split")
WALL_COLUMNS = ("basis_seconds", "solve_seconds")
REPORT_COLUMNS = [
    "point", "scheme", "method", "m", "k", "L", "l", "omega", "field", "contrast", "seed",
    "tau", "T", "dof", "nolp", "energy_error", "l2_error", "rq", "gamma", "tau_max",
    "delta_lsi", "n_explicit", *WALL_COLUMNS,
]


# ---------------------------------------------------------------- config

def _opt_int(s):
    return None if s.lower() == "none" else int(s)


def _opt_str(s):
    return None if s.lower() == "none" else s


def _bool(s):
    v = s.lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _split_count(s):
    v = s.lower()
    if v in ("none", "auto"):
        return None if v == "none" else "auto"
    return int(s)


def _values(s):
    """``a..b`` (inclusive integer range) or comma separated numbers."""
    if ".." in s:
        lo, hi = (int(t) for t in s.split(".."))
        out = list(range(lo, hi + 1))
    else:
        out = [float(t) for t in s.split(",") if t.strip()]
        out = [int(v) if v.is_integer() and "e" not in s.lower() else v for v in out]
    if not out:
        raise ValueError("empty value list")
    return out


def _p(parse, default):
    return field(default=default, metadata={"parse": parse})


@dataclass(frozen=True)
class GridSection:
    nc: int = _p(int, 10)
    r: int = _p(int, 10)


@dataclass(frozen=True)
class FieldSection:
    kind: str = _p(str, "inclusions")
    contrast: float = _p(float, 1e4)
    seed: int = _p(int, 1)
    raster: str | None = _p(_opt_str, None)
    threshold: float = _p(float, 127.5)
    kappa_low: float = _p(float, 1.0)


@dataclass(frozen=True)
class SourceSection:
    f: str = _p(str, "sine")
    f_scale: float = _p(float, 1.0)
    u0: str = _p(str, "zero")
    u0_scale: float = _p(float, 1.0)


@dataclass(frozen=True)
class BasisSection:
    method: str = _p(str, "lksi")
    m: int = _p(int, 4)
    k: int = _p(int, 4)
    L: int | None = _p(_opt_int, None)
    drop_tol: float = _p(float, 1e-10)
    space: str | None = _p(_opt_str, None)  # import instead of building

    def config(self) -> BasisConfig:
        return BasisConfig(self.method, self.m, self.k, self.L, self.drop_tol)


@dataclass(frozen=True)
class SplitSection:
    l: object = _p(_split_count, None)  # None, int or "auto"
    omega: float = _p(float, 1.0)
    orthogonalize: bool = _p(_bool, True)


@dataclass(frozen=True)
class TimeSection:
    tau: float = _p(float, 1e-4)
    T: float = _p(float, 0.1)
    stride: int = _p(int, 1)
    scheme: str = _p(str, "implicit_coarse")


@dataclass(frozen=True)
class SweepSection:
    axis: str = _p(str, "none")
    values: tuple | None = _p(lambda s: tuple(_values(s)), None)


@dataclass(frozen=True)
class OracleSection:
    subdomain: int = _p(int, 0)
    count: int = _p(int, 6)


@dataclass(frozen=True)
class OutputSection:
    dir: str = _p(str, "results")
    snapshots: bool = _p(_bool, False)


@dataclass(frozen=True)
class ExperimentConfig:
    grid: GridSection = GridSection()
    field: FieldSection = FieldSection()
    source: SourceSection = SourceSection()
    basis: BasisSection = BasisSection()
    split: SplitSection = SplitSection()
    time: TimeSection = TimeSection()
    sweep: SweepSection = SweepSection()
    oracle: OracleSection = OracleSection()
    output: OutputSection = OutputSection()

    def with_value(self, key: str, value) -> "ExperimentConfig":
        section, name = key.split(".")
        return replace(self, **{section: replace(getattr(self, section), **{name: value})})

    def validate(self) -> "ExperimentConfig":
        if self.grid.nc < 1 or self.grid.r < 1:
            raise ConfigError("grid.nc and grid.r must be positive")
        if self.field.kind not in FIELD_KINDS + ("raster",):
            raise ConfigError(f"field.kind: unknown kind {self.field.kind!r}")
        if self.field.kind == "raster" and not self.field.raster:
            raise ConfigError("field.kind = raster needs field.raster")
        if self.field.contrast < 1:
            raise ConfigError("field.contrast must be >= 1")
        if self.basis.method not in ("lssi", "lksi"):
            raise ConfigError(f"basis.method: unknown method {self.basis.method!r}")
        if self.basis.m < 1 or self.basis.k < 1:
            raise ConfigError("basis.m and basis.k must be >= 1")
        if self.sweep.axis not in SWEEP_AXES:
            raise ConfigError(f"sweep.axis: expected one of {SWEEP_AXES}")
        if self.sweep.axis in ("iter", "oversampling", "contrast") and not self.sweep.values:
            raise ConfigError(f"sweep.axis = {self.sweep.axis} needs a nonempty sweep.values")
        if self.time.scheme == "splitting" and self.split.l is None:
            raise ConfigError("time.scheme = splitting needs split.l")
        try:
            self.scheme()
        except ValueError as exc:
            raise ConfigError(f"time: {exc}") from exc
        return self

    def scheme(self, override_stability: bool = False) -> SchemeConfig:
        return SchemeConfig(self.time.tau, self.time.T, self.split.omega, self.time.scheme,
                            self.time.stride, override_stability)

    def source_spec(self) -> SourceSpec:
        return SourceSpec(self.source.f, self.source.f_scale, self.source.u0, self.source.u0_scale)


def parse_config(text: str, origin: str = "<config>") -> ExperimentConfig:
    cfg = ExperimentConfig()
    sections = {f.name: f.type for f in dataclasses.fields(cfg)}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{origin}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        parts = key.split(".")
        if len(parts) != 2 or parts[0] not in sections:
            raise ConfigError(f"{where}: unknown key {key!r}")
        sec = getattr(cfg, parts[0])
        fields = {f.name: f for f in dataclasses.fields(sec)}
        if parts[1] not in fields:
            raise ConfigError(f"{where}: unknown key {key!r}")
        try:
            parsed = fields[parts[1]].metadata["parse"](value)
        except ValueError as exc:
            raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from exc
        cfg = cfg.with_value(key, parsed)
    try:
        return cfg.validate()
    except ConfigError as exc:
        raise ConfigError(f"{origin}: {exc}") from exc


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return parse_config(text, str(path))


# ---------------------------------------------------------------- runner

class Experiment:
    """Caches operators, fine references and spaces across sweep points."""

    def __init__(self, parallel: bool = False, override_stability: bool = False):
        self.parallel = parallel
        self.override_stability = override_stability
        self._ops = {}
        self._refs = {}
        self._spaces = {}

    def operators(self, cfg: ExperimentConfig):
        key = (cfg.grid, cfg.field)
        if key not in self._ops:
            grid = build_grid(cfg.grid.nc, cfg.grid.r)
            fc = cfg.field
            if fc.kind == "raster":
                kfield = load_raster(fc.raster, fc.threshold, fc.kappa_low, fc.kappa_low * fc.contrast, grid)
            else:
                kfield = generate_field(grid, fc.kind, fc.contrast, fc.seed)
            self._ops[key] = assemble(grid, kfield)
        return self._ops[key]

    def initial(self, cfg, ops):
        return interpolate_free(ops.grid, cfg.source_spec().u0(ops.grid.node_coords))

    def reference(self, cfg: ExperimentConfig):
        key = (cfg.grid, cfg.field, cfg.source, cfg.time.tau, cfg.time.T, cfg.time.stride)
        if key not in self._refs:
            ops = self.operators(cfg)
            sc = replace(cfg.scheme(), scheme="fine_reference")
            self._refs[key] = solve_fine_reference(ops, cfg.source_spec(), self.initial(cfg, ops), sc)
        return self._refs[key]

    def space(self, cfg: ExperimentConfig):
        """Returns ``(space, seconds)``; imported when ``basis.space`` is set."""
        key = (cfg.grid, cfg.field, cfg.basis)
        if key not in self._spaces:
            ops = self.operators(cfg)
            t0 = time.perf_counter()
            if cfg.basis.space:
                space = load_space(cfg.basis.space, ops)
            else:
                space = build_multiscale_space(ops.grid, ops, cfg.basis.config(), parallel=self.parallel)
            self._spaces[key] = (space, time.perf_counter() - t0)
        return self._spaces[key]

    def split(self, cfg, space):
        return split_space(space, cfg.split.l, orthogonalize=cfg.split.orthogonalize)

    def point(self, cfg: ExperimentConfig, index: int = 0):
        """Run one configuration; returns ``(row, series)``."""
        ops = self.operators(cfg)
        ref = self.reference(cfg)
        space, basis_seconds = self.space(cfg)
        sc = cfg.scheme(self.override_stability)
        row = {
            "point": index, "scheme": sc.scheme, "method": space.config.method if space.config else cfg.basis.method,
            "m": cfg.basis.m, "k": cfg.basis.k, "L": cfg.basis.L, "l": cfg.split.l, "omega": cfg.split.omega,
            "field": cfg.field.kind, "contrast": cfg.field.contrast, "seed": cfg.field.seed,
            "tau": sc.tau, "T": sc.T, "dof": space.n_ms, "nolp": space.nolp,
            "delta_lsi": delta_lsi_estimate(space, overlap_count(ops.grid, cfg.basis.m)),
            "basis_seconds": basis_seconds,
        }
        split = None
        if cfg.split.l is not None:
            split = self.split(cfg, space)
            row["n_explicit"] = int(split.i2.size)
            if split.i2.size:
                row["rq"] = explicit_rayleigh_quotient(split)
                try:
                    row["gamma"] = cauchy_schwarz_gamma(split)
                except EmptySplit:
                    row["gamma"] = 0.0
            row["tau_max"] = splitting_stability_limit(split, sc.omega)
        t0 = time.perf_counter()
        u0 = self.initial(cfg, ops)
        if sc.scheme == "splitting":
            traj = solve_splitting(split, ops, cfg.source_spec(), u0, sc, tau_max=row["tau_max"])
        else:
            traj = solve_implicit_coarse(space, ops, cfg.source_spec(), u0, sc)
        row["solve_seconds"] = time.perf_counter() - t0
        series = error_series(ref, traj, space.P, ops.A, ops.M)
        row["energy_error"], row["l2_error"] = series[-1][1], series[-1][2]
        log.info("point %d: %s dof=%d energy=%.3e l2=%.3e", index, sc.scheme, space.n_ms,
                 row["energy_error"], row["l2_error"])
        return row, series


def sweep_points(cfg: ExperimentConfig) -> list[ExperimentConfig]:
    axis, values = cfg.sweep.axis, cfg.sweep.values
    if axis == "none":
        return [cfg]
    if axis == "iter":
        return [cfg.with_value("basis.k", int(v)) for v in values]
    if axis == "oversampling":
        return [cfg.with_value("basis.m", int(v)) for v in values]
    if axis == "contrast":
        return [cfg.with_value("field.contrast", float(v)) for v in values]
    # split comparison: fully implicit against the splitting scheme on one space
    if cfg.split.l is None:
        raise ConfigError("sweep.axis = split needs split.l")
    return [cfg.with_value("time.scheme", "implicit_coarse"), cfg.with_value("time.scheme", "splitting")]


def run_sweep(cfg: ExperimentConfig, out: Path, exp: Experiment | None = None) -> list[dict]:
    exp = exp or Experiment()
    rows = []
    for i, point in enumerate(sweep_points(cfg)):
        row, series = exp.point(point, i)
        rows.append(row)
        write_series_csv(out / f"series_{i:03d}.csv", series)
    write_csv_atomic(out / "report.csv", rows, REPORT_COLUMNS)
    return rows


def cmd_basis(cfg, out, exp):
    space, seconds = exp.space(cfg)
    ops = exp.operators(cfg)
    save_space(out / "space.txt", space, ops.grid)
    rows = [{"subdomain": int(o), "rank": int(r), "theta": float(t)}
            for o, r, t in zip(space.owner, space.rank, space.thetas)]
    write_csv_atomic(out / "ritz_values.csv", rows, ["subdomain", "rank", "theta"])
    if cfg.split.l is not None:
        save_split(out / "split.txt", exp.split(cfg, space), cfg.split.omega)
    log.info("basis: n_ms=%d NoLP=%d in %.2fs", space.n_ms, space.nolp, seconds)


def cmd_reference(cfg, out, exp):
    ref = exp.reference(cfg)
    ops = exp.operators(cfg)
    snaps = out / "reference_snapshots.txt" if cfg.output.snapshots else None
    write_trajectory_csv(out / "reference.csv", ref, ops.A, ops.M, snapshots_path=snaps)


def cmd_oracle(cfg, out, exp):
    ops = exp.operators(cfg)
    i = cfg.oracle.subdomain
    if not 0 <= i < ops.grid.n_coarse:
        raise ConfigError(f"oracle.subdomain must lie in [0, {ops.grid.n_coarse})")
    sd = oversample(ops.grid, i, cfg.basis.m)
    A_i, M_i = restrict_local(ops, sd)
    thetas, _ = local_eig_oracle(A_i, M_i, cfg.oracle.count)
    basis = build_local_basis(ops, sd, cfg.basis.method, cfg.basis.k, cfg.basis.L, cfg.basis.drop_tol)
    rows = []
    for j, th in enumerate(thetas):
        ritz = float(basis.thetas[j]) if j < basis.L else None
        rows.append({"index": j, "theta": float(th), "lambda": 1.0 / float(th), "ritz_theta": ritz})
    write_csv_atomic(out / "oracle.csv", rows, ["index", "theta", "lambda", "ritz_theta"])


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lsi-parabolic", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in [("basis", "build and export the multiscale space"),
                        ("solve", "run one configuration"),
                        ("sweep", "run the sweep named by sweep.axis"),
                        ("reference", "fine-grid reference solve only"),
                        ("oracle", "dense local eigenpairs for one subdomain")]:
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", type=Path, help="key = value config file")
        s.add_argument("--out", type=Path, help="output directory (overrides output.dir)")
        s.add_argument("--parallel-subdomains", action="store_true")
        s.add_argument("--override-stability", action="store_true",
                       help="warn instead of refusing tau above the stability limit")
        s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


COMMANDS = {
    "basis": cmd_basis,
    "solve": lambda cfg, out, exp: run_sweep(cfg.with_value("sweep.axis", "none"), out, exp),
    "sweep": lambda cfg, out, exp: run_sweep(cfg, out, exp),
    "reference": cmd_reference,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        text = Path(args.config).read_text() if args.config else ""
        text += "\n" + "\n".join(s.replace("=", " = ", 1) for s in args.set)
        cfg = parse_config(text, str(args.config or "<args>"))
        out = args.out or Path(cfg.output.dir)
        out.mkdir(parents=True, exist_ok=True)
        exp = Experiment(parallel=args.parallel_subdomains, override_stability=args.override_stability)
        COMMANDS[args.command](cfg, out, exp)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
