"""Backward Euler on the fine grid and on the coarse space, and the
partially explicit splitting scheme on an implicit/explicit coarse split."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .assembly import FineOperators, assemble_load
from .coarse_space import (
    MultiscaleSpace,
    SplitSpace,
    cauchy_schwarz_gamma,
    explicit_rayleigh_quotient,
    stability_limit,
)
from .errors import BlowUp, StabilityLimitExceeded, StabilityViolation
from .fields import SourceSpec
from .linalg import factorize_spd

SCHEMES = ("fine_reference", "implicit_coarse", "splitting")
BLOWUP_FACTOR = 1e6


@dataclass(frozen=True)
class SchemeConfig:
    tau: float
    T: float
    omega: float = 1.0
    scheme: str = "implicit_coarse"
    stride: int = 1
    override_stability: bool = False

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.T < self.tau:
            raise ValueError("T must be at least tau")
        if not 0.0 <= self.omega <= 1.0:
            raise ValueError("omega must lie in [0, 1]")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.T / self.tau)))


@dataclass
class Trajectory:
    """Snapshots after steps ``stride, 2 stride, ...`` and always the last step.

    ``states`` are fine free-dof vectors (``basis == "fine"``) or coarse
    coefficient vectors (``basis == "coarse"``).
    """

    scheme: str
    basis: str
    steps: list = field(default_factory=list)
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def record(self, step: int, t: float, state: np.ndarray):
        self.steps.append(step)
        self.times.append(t)
        self.states.append(state.copy())

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def fine_states(self, P=None) -> list:
        if self.basis == "fine":
            return self.states
        return [P @ c for c in self.states]


def _snapshot(step: int, n_steps: int, stride: int) -> bool:
    return step % stride == 0 or step == n_steps


class _Loads:
    """Load vectors, optionally mapped by ``project``; cached for time-independent sources."""

    def __init__(self, grid, source: SourceSpec, project=None):
        self.grid = grid
        self.source = source
        self.project = project
        self._cached = self._eval(0.0) if source.time_independent else None

    def _eval(self, t):
        b = assemble_load(self.grid, self.source, t)
        return b if self.project is None else self.project(b)

    def __call__(self, t: float) -> np.ndarray:
        if self._cached is not None:
            return self._cached
        return self._eval(t)


def solve_fine_reference(ops: FineOperators, source: SourceSpec, u0: np.ndarray, cfg: SchemeConfig) -> Trajectory:
    """``(M + tau A) u^{n+1} = M u^n + tau b(t^{n+1})`` with one factorization."""
    tau = cfg.tau
    fact = factorize_spd(ops.M + tau * ops.A)
    loads = _Loads(ops.grid, source)
    u = np.asarray(u0, dtype=float).copy()
    traj = Trajectory("fine_reference", "fine")
    for n in range(cfg.n_steps):
        t1 = (n + 1) * tau
        u = fact.solve(ops.M @ u + tau * loads(t1))
        if _snapshot(n + 1, cfg.n_steps, cfg.stride):
            traj.record(n + 1, t1, u)
    return traj


def project_initial(space: MultiscaleSpace, ops: FineOperators, u0_fine: np.ndarray) -> np.ndarray:
    """Mass (L2) projection of a fine vector onto the coarse space."""
    rhs = space.P.T @ (ops.M @ np.asarray(u0_fine, dtype=float))
    return sla.cho_solve(sla.cho_factor(space.M_c), rhs)


def solve_implicit_coarse(space: MultiscaleSpace, ops: FineOperators, source: SourceSpec,
                          u0_fine: np.ndarray, cfg: SchemeConfig) -> Trajectory:
    tau = cfg.tau
    K = sla.cho_factor(space.M_c + tau * space.A_c)
    loads = _Loads(ops.grid, source, lambda b: space.P.T @ b)
    c = project_initial(space, ops, u0_fine)
    traj = Trajectory("implicit_coarse", "coarse")
    for n in range(cfg.n_steps):
        t1 = (n + 1) * tau
        rhs = space.M_c @ c + tau * loads(t1)
        c = sla.cho_solve(K, rhs)
        if _snapshot(n + 1, cfg.n_steps, cfg.stride):
            traj.record(n + 1, t1, c)
    return traj


def splitting_stability_limit(split: SplitSpace, omega: float) -> float:
    """``inf`` when there is no explicit part."""
    if split.i2.size == 0:
        return np.inf
    rq = explicit_rayleigh_quotient(split)
    gamma = cauchy_schwarz_gamma(split) if split.i1.size else 0.0
    return stability_limit(rq, gamma, omega)


def solve_splitting(split: SplitSpace, ops: FineOperators, source: SourceSpec,
                    u0_fine: np.ndarray, cfg: SchemeConfig, tau_max: float | None = None) -> Trajectory:
    """Implicit update on ``i1`` then explicit update on ``i2`` per step.

    ``u^{-1} := u^0``.  The implicit block sees the load at ``t^{n+1}``, the
    explicit block the load at ``t^n``.  ``tau_max`` may be passed in to skip
    recomputing the stability limit.
    """
    space = split.space
    tau, omega = cfg.tau, cfg.omega
    i1, i2 = split.i1, split.i2
    if tau_max is None:
        tau_max = splitting_stability_limit(split, omega)
    if tau > tau_max:
        msg = f"tau={tau:.3e} exceeds the stability limit {tau_max:.3e}"
        if not cfg.override_stability:
            raise StabilityLimitExceeded(msg)
        warnings.warn(msg, StabilityViolation, stacklevel=2)

    A11, A12, A22 = split.A11, split.A12, split.A22
    M11, M12, M22 = split.M11, split.M12, split.M22
    A21, M21 = A12.T, M12.T
    K1 = sla.cho_factor(M11 + tau * A11) if i1.size else None
    K2 = sla.cho_factor(M22) if i2.size else None

    split_load = _Loads(ops.grid, source, lambda b: split.T.T @ (space.P.T @ b))
    n1 = i1.size

    c0 = project_initial(space, ops, u0_fine)
    y0 = split.to_split(c0)
    u1, u2 = y0[:n1].copy(), y0[n1:].copy()
    u1_old, u2_old = u1.copy(), u2.copy()

    def m_norm(vec):
        return float(np.sqrt(max(vec @ (space.M_c @ vec), 0.0)))

    # blow-up reference: |u0| plus the accumulated source contribution
    f_free = source.f(ops.grid.free_coords, 0.0)
    f_scale = np.sqrt(max(f_free @ (ops.M @ f_free), 0.0))
    bound = m_norm(c0)

    traj = Trajectory("splitting", "coarse", info={"tau_max": tau_max})
    for n in range(cfg.n_steps):
        t0, t1 = n * tau, (n + 1) * tau
        if i1.size:
            rhs1 = M11 @ u1 - M12 @ (u2 - u2_old) - tau * (A12 @ u2) + tau * split_load(t1)[:n1]
            u1_new = sla.cho_solve(K1, rhs1)
        else:
            u1_new = u1
        if i2.size:
            coupling = A21 @ ((1.0 - omega) * u1 + omega * u1_new) if i1.size else 0.0
            rhs2 = (M22 @ u2 - (M21 @ (u1 - u1_old) if i1.size else 0.0)
                    - tau * (coupling + A22 @ u2) + tau * split_load(t0)[n1:])
            u2_new = sla.cho_solve(K2, rhs2)
        else:
            u2_new = u2
        u1_old, u2_old = u1, u2
        u1, u2 = u1_new, u2_new
        c = split.from_split(np.concatenate([u1, u2]))

        bound += tau * f_scale
        norm = m_norm(c)
        if not np.isfinite(norm) or norm > BLOWUP_FACTOR * max(bound, np.finfo(float).tiny):
            raise BlowUp(f"step {n + 1} (t={t1:.4g}): |u|_M={norm:.3e} exceeds {BLOWUP_FACTOR:g} x {bound:.3e}")
        if _snapshot(n + 1, cfg.n_steps, cfg.stride):
            traj.record(n + 1, t1, c)
    return traj
