"""Offline construction of local multiscale bases.

Both iterations apply the local inverse operator through constrained
(saddle-point) solves with the mass pairing as constraint functional:

* LSSI iterates a block of ``L`` functions, ``Phi <- A^{-1} M Phi S^{-1}``,
  with the normalization ``<phi^{r,k}, phi^{j,k+1}> = delta_rj``.
* LKSI iterates a single function, ``psi^{s+1} ~ A^{-1} M psi^s`` with
  ``<psi^s, psi^{s+1}> = 1``, and keeps every iterate ``psi^1 .. psi^k``.

The final space is M-orthonormalized and rotated to Ritz vectors of the
pencil ``(A_i, M_i)``; Ritz values ``theta`` approximate the smallest
eigenvalues of the local operator and ``1/theta`` the largest ones of its
inverse.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInit, InsufficientVectors, KrylovBreakdown, TooLarge
from .grid import Subdomain
from .linalg import SpdFactorization, dense_sym_gen_eig, factorize_spd, m_orthonormalize, solve_saddle

METHODS = ("lssi", "lksi")
ORACLE_MAX_DOFS = 12000


@dataclass
class LocalBasis:
    method: str
    k: int
    vectors: np.ndarray  # (n_local, L), M_i-orthonormal Ritz vectors
    thetas: np.ndarray  # ascending Ritz values
    nolp: int = 0
    index: int = -1
    dofs: np.ndarray | None = None
    discarded_thetas: np.ndarray = field(default_factory=lambda: np.zeros(0))
    breakdown: bool = False

    @property
    def L(self) -> int:
        return self.vectors.shape[1]

    @property
    def lambdas(self) -> np.ndarray:
        """Estimates of the largest eigenvalues of the local inverse operator (descending)."""
        return 1.0 / self.thetas


def initial_functions(sd: Subdomain, method: str) -> np.ndarray:
    """Initial local functions on the central coarse cell, shape (n_local, 4 or 1).

    LSSI: the four Q1 coarse hat functions of ``K_i`` sampled at its fine
    nodes.  LKSI: the indicator of the nodes of ``K_i``.
    """
    method = method.lower()
    grid = sd.grid
    r = grid.r
    cx, cy = grid.coarse_ij(sd.index)
    nodes = grid.free_nodes[sd.dofs[sd.central]]
    ix, iy = nodes % (grid.n + 1), nodes // (grid.n + 1)
    xi = (ix - cx * r) / r
    eta = (iy - cy * r) / r
    if method == "lssi":
        cols = [(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta]
    elif method == "lksi":
        cols = [np.ones(nodes.size)]
    else:
        raise ValueError(f"unknown method {method!r}")
    out = np.zeros((sd.n_dofs, len(cols)))
    for j, c in enumerate(cols):
        if not np.any(c):
            raise DegenerateInit(f"initial function {j} of subdomain {sd.index} vanishes")
        out[sd.central, j] = c
    return out


def rayleigh_ritz(V, A, M):
    """Ritz pairs of ``(A, M)`` on the span of M-orthonormal columns ``V``."""
    AV = A @ V
    MV = M @ V
    thetas, Y = dense_sym_gen_eig(V.T @ AV, V.T @ MV)
    return thetas, V @ Y


def rayleigh_ritz_select(V, A, M, L: int):
    """Keep the ``L`` Ritz vectors with the smallest Ritz values.

    Returns ``(vectors, thetas, discarded_thetas)``.  Ties keep the
    eigensolver's ascending order.
    """
    V = np.asarray(V, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    if V.shape[1] < L:
        raise InsufficientVectors(f"need {L} vectors, have {V.shape[1]}")
    thetas, W = rayleigh_ritz(V, A, M)
    order = np.argsort(thetas, kind="stable")
    keep, drop = order[:L], order[L:]
    return W[:, keep], thetas[keep], thetas[drop]


def _factor(A, fact):
    return fact if fact is not None else factorize_spd(A)


def lssi_iterate(A, M, Phi0, k: int, fact: SpdFactorization | None = None,
                 L: int | None = None, drop_tol: float = 1e-10,
                 history: list | None = None) -> LocalBasis:
    """Block inverse iteration through multi-constraint saddle solves.

    ``history``, if given, receives the raw iterate block after every step
    (index 0 is ``Phi0``).
    """
    fact = _factor(A, fact)
    Phi = np.asarray(Phi0, dtype=float)
    if Phi.ndim == 1:
        Phi = Phi[:, None]
    nvec = Phi.shape[1]
    if history is not None:
        history.append(Phi.copy())
    for _ in range(k):
        Phi, _ = solve_saddle(fact, M @ Phi)
        if history is not None:
            history.append(Phi.copy())
    V = m_orthonormalize(Phi, M, drop_tol)
    L = V.shape[1] if L is None else L
    vecs, thetas, discarded = rayleigh_ritz_select(V, A, M, L)
    return LocalBasis("lssi", k, vecs, thetas, nolp=nvec * k, discarded_thetas=discarded)


def krylov_vectors(A, M, psi0, k: int, fact: SpdFactorization | None = None):
    """Raw LKSI iterates ``psi^1 .. psi^k`` as columns."""
    fact = _factor(A, fact)
    psi = np.asarray(psi0, dtype=float).ravel()
    if not np.any(psi):
        raise DegenerateInit("zero initial function")
    out = []
    for _ in range(k):
        X, _ = solve_saddle(fact, (M @ psi)[:, None])
        psi = X[:, 0]
        out.append(psi)
    return np.column_stack(out) if out else np.zeros((psi.size, 0))


def lksi_iterate(A, M, psi0, k: int, fact: SpdFactorization | None = None,
                 L: int | None = None, drop_tol: float = 1e-10) -> LocalBasis:
    """Krylov iteration; keeps all ``k`` iterates unless ``L < k``.

    If a new iterate is (numerically) in the span of the previous ones the
    recurrence stops, a :class:`KrylovBreakdown` warning is issued and the
    basis built so far is returned with ``breakdown=True``.
    """
    if k < 1:
        raise ValueError("LKSI needs k >= 1")
    fact = _factor(A, fact)
    psi = np.asarray(psi0, dtype=float).ravel()
    if not np.any(psi):
        raise DegenerateInit("zero initial function")
    kept: list[np.ndarray] = []
    Q = None
    breakdown = False
    solves = 0
    for s in range(1, k + 1):
        X, _ = solve_saddle(fact, (M @ psi)[:, None])
        solves += 1
        psi = X[:, 0]
        trial = m_orthonormalize(np.column_stack(kept + [psi]), M, drop_tol)
        if trial.shape[1] < len(kept) + 1:
            warnings.warn(f"Krylov breakdown at s={s}: invariant subspace of dimension {len(kept)}",
                          KrylovBreakdown, stacklevel=2)
            breakdown = True
            break
        kept.append(psi)
        Q = trial
    L = Q.shape[1] if L is None else min(L, Q.shape[1])
    vecs, thetas, discarded = rayleigh_ritz_select(Q, A, M, L)
    return LocalBasis("lksi", k, vecs, thetas, nolp=solves, discarded_thetas=discarded,
                      breakdown=breakdown)


def local_eig_oracle(A, M, count: int):
    """Dense reference eigenpairs: the ``count`` smallest of ``(A, M)``."""
    n = A.shape[0]
    if n > ORACLE_MAX_DOFS:
        raise TooLarge(f"{n} dofs exceeds the dense oracle limit of {ORACLE_MAX_DOFS}")
    Ad = A.toarray() if hasattr(A, "toarray") else np.asarray(A)
    Md = M.toarray() if hasattr(M, "toarray") else np.asarray(M)
    return dense_sym_gen_eig(Ad, Md, count=count)


def build_local_basis(ops, sd: Subdomain, method: str, k: int, L: int | None = None,
                      drop_tol: float = 1e-10) -> LocalBasis:
    """Factorize the local stiffness once and run the requested iteration."""
    from .assembly import restrict_local

    method = method.lower()
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    A_i, M_i = restrict_local(ops, sd)
    fact = factorize_spd(A_i)
    init = initial_functions(sd, method)
    if method == "lssi":
        basis = lssi_iterate(A_i, M_i, init, k, fact=fact, L=L, drop_tol=drop_tol)
    else:
        basis = lksi_iterate(A_i, M_i, init[:, 0], k, fact=fact, L=L, drop_tol=drop_tol)
    basis.index = sd.index
    basis.dofs = sd.dofs
    return basis
