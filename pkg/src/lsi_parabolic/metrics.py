"""Error norms against the fine reference and report output."""
from __future__ import annotations

import csv
import io
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import TimeGridMismatch, ZeroReference


def _norm_error(u_ref, c, P, X, relative: bool) -> float:
    u_ref = np.asarray(u_ref, dtype=float)
    approx = np.asarray(c, dtype=float) if P is None else P @ c
    d = u_ref - approx
    num = np.sqrt(max(d @ (X @ d), 0.0))
    if not relative:
        return float(num)
    den = np.sqrt(max(u_ref @ (X @ u_ref), 0.0))
    if den < 1e-300:
        raise ZeroReference("reference solution has zero norm")
    return float(num / den)


def energy_error(u_ref, c, P, A, relative: bool = True) -> float:
    """``|u_ref - P c|_A``, relative to ``|u_ref|_A`` by default.  ``P=None`` means ``c`` is fine."""
    return _norm_error(u_ref, c, P, A, relative)


def l2_error(u_ref, c, P, M, relative: bool = True) -> float:
    return _norm_error(u_ref, c, P, M, relative)


def error_series(traj_ref, traj, P, A, M):
    """Per-snapshot ``(t, energy error, L2 error)`` of ``traj`` against ``traj_ref``."""
    t_ref, t = np.asarray(traj_ref.times), np.asarray(traj.times)
    if t_ref.shape != t.shape or not np.allclose(t_ref, t, rtol=0.0, atol=1e-12 * max(1.0, t_ref.max(initial=0.0))):
        raise TimeGridMismatch(f"snapshot times differ ({t_ref.size} vs {t.size} snapshots)")
    Pc = None if traj.basis == "fine" else P
    return [
        (float(ti), energy_error(u, c, Pc, A), l2_error(u, c, Pc, M))
        for ti, u, c in zip(t, traj_ref.states, traj.states)
    ]


def delta_lsi_estimate(space, overlap: int) -> float:
    """Overlap constant times the square root of the largest first-neglected eigenvalue estimate.

    Per subdomain the estimate is the largest discarded ``1/theta`` when the
    basis went through spectral selection, otherwise the smallest kept
    ``1/theta``.
    """
    best = 0.0
    for i in range(space.n_subdomains):
        dropped = space.discarded[i] if i < len(space.discarded) else np.zeros(0)
        if dropped.size:
            lam = 1.0 / dropped.min()
        else:
            lam = 1.0 / space.thetas[space.columns_of(i)].max()
        best = max(best, lam)
    return float(overlap * np.sqrt(best))


@dataclass
class ErrorReport:
    energy_error: float
    l2_error: float
    series: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def row(self) -> dict:
        out = dict(self.meta)
        out["energy_error"] = self.energy_error
        out["l2_error"] = self.l2_error
        return out


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return "" if v is None else str(v)


def write_csv_atomic(path, rows: list[dict], columns: list[str] | None = None) -> Path:
    """Write dict rows to CSV via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if columns is None:
        columns = []
        for r in rows:
            columns += [k for k in r if k not in columns]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(buf.getvalue())
    os.replace(tmp, path)
    return path


def write_series_csv(path, series) -> Path:
    rows = [{"time": t, "energy_error": e, "l2_error": l2} for t, e, l2 in series]
    return write_csv_atomic(path, rows, ["time", "energy_error", "l2_error"])


def write_trajectory_csv(path, traj, A, M, P=None, snapshots_path=None) -> Path:
    """Columns (step, time, m_norm, energy_norm); optional row-per-dof snapshot file."""
    rows = []
    fine = traj.fine_states(P)
    for step, t, u in zip(traj.steps, traj.times, fine):
        rows.append({
            "step": step,
            "time": t,
            "m_norm": float(np.sqrt(max(u @ (M @ u), 0.0))),
            "energy_norm": float(np.sqrt(max(u @ (A @ u), 0.0))),
        })
    if snapshots_path is not None:
        data = np.column_stack(fine) if fine else np.zeros((0, 0))
        with open(snapshots_path, "w") as fh:
            fh.write("# dof " + " ".join(repr(float(t)) for t in traj.times) + "\n")
            for d, row in enumerate(data):
                fh.write(f"{d} " + " ".join(repr(float(v)) for v in row) + "\n")
    return write_csv_atomic(path, rows, ["step", "time", "m_norm", "energy_norm"])

