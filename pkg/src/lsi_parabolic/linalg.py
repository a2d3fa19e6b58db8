"""Sparse/dense linear algebra kernels.

Sparse symmetric matrices are plain ``scipy.sparse.csr_matrix`` objects
(``indptr``/``indices``/``data`` are the row pointer, column index and value
arrays).  :func:`sym_csr` canonicalizes and validates them.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.io
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import cg, splu

from .errors import (
    EmptyBasis,
    MassNotSpd,
    MaxIterations,
    NotPositiveDefinite,
    RankDeficientConstraints,
)

SYM_TOL = 1e-12


def sym_csr(A, check=True) -> sp.csr_matrix:
    """Return ``A`` as CSR with sorted, duplicate-free column indices.

    With ``check`` the matrix must be square and symmetric to
    ``SYM_TOL * max|A|``.
    """
    A = sp.csr_matrix(A, dtype=float)
    A.sum_duplicates()
    A.sort_indices()
    if check:
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"matrix is not square: {A.shape}")
        if A.nnz:
            scale = abs(A).max()
            asym = abs(A - A.T).max() if A.nnz else 0.0
            if asym > SYM_TOL * scale:
                raise ValueError(f"matrix not symmetric: max|A-A^T| = {asym:.3e}")
    return A


@dataclass(frozen=True, eq=False)
class SpdFactorization:
    """Reusable factorization of a sparse SPD matrix.

    SuperLU is run in symmetric mode with diagonal pivoting only, so the
    factorization is a permuted LDL^T and the diagonal of U holds the pivots.
    """

    matrix: sp.csr_matrix
    _lu: object = field(repr=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if self.n == 0:
            return np.zeros_like(b)
        return self._lu.solve(b)


def factorize_spd(A, pivot_tol: float = 1e-14) -> SpdFactorization:
    A = sym_csr(A, check=False)
    n = A.shape[0]
    if n == 0:
        return SpdFactorization(A, None)
    try:
        lu = splu(
            A.tocsc(),
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
    except RuntimeError as exc:  # exactly singular
        raise NotPositiveDefinite(str(exc)) from exc
    if not np.array_equal(lu.perm_r, lu.perm_c):
        raise NotPositiveDefinite("off-diagonal pivoting was required; matrix is not SPD")
    pivots = lu.U.diagonal()
    scale = np.abs(A.diagonal()).max()
    bad = np.flatnonzero(pivots <= pivot_tol * scale)
    if bad.size:
        raise NotPositiveDefinite(
            f"{bad.size} nonpositive pivot(s), smallest {pivots.min():.3e}"
        )
    return SpdFactorization(A, lu)


def dense_sym_gen_eig(a_mat, m_mat, count: int | None = None):
    """Solve ``a v = theta m v`` for a dense symmetric pencil.

    Returns ascending ``thetas`` and the m-orthonormal eigenvectors as columns,
    only the ``count`` smallest pairs if ``count`` is given.
    """
    a = np.asarray(a_mat, dtype=float)
    m = np.asarray(m_mat, dtype=float)
    if a.shape != m.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"pencil shape mismatch: {a.shape} vs {m.shape}")
    a = 0.5 * (a + a.T)
    m = 0.5 * (m + m.T)
    try:
        sla.cholesky(m, lower=True)
    except sla.LinAlgError as exc:
        raise MassNotSpd(str(exc)) from exc
    subset = None if count is None else (0, min(count, a.shape[0]) - 1)
    thetas, vecs = sla.eigh(a, m, subset_by_index=subset)
    return thetas, vecs


def solve_saddle(fact: SpdFactorization, B, targets=None):
    """Solve ``A X + B Mu = 0``, ``B^T X = targets`` column by column.

    ``targets`` defaults to the identity (canonical constraint values).
    Implemented with the Schur complement ``S = B^T A^{-1} B``.
    """
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    L = B.shape[1]
    if L < 1:
        raise ValueError("need at least one constraint")
    E = np.eye(L) if targets is None else np.asarray(targets, dtype=float).reshape(L, -1)
    Y = fact.solve(B)
    if Y.ndim == 1:
        Y = Y[:, None]
    S = B.T @ Y
    S = 0.5 * (S + S.T)
    s_eigs = np.linalg.eigvalsh(S)
    s_norm = np.abs(s_eigs).max() if s_eigs.size else 0.0
    if s_norm == 0.0 or s_eigs.min() <= 1e-12 * s_norm:
        raise RankDeficientConstraints(
            f"Schur complement singular (eigenvalues {s_eigs.min():.3e} .. {s_norm:.3e})"
        )
    Z = sla.solve(S, E, assume_a="pos")
    return Y @ Z, -Z


def m_orthonormalize(V, M, drop_tol: float = 1e-10) -> np.ndarray:
    """M-orthonormalize the columns of ``V`` by modified Gram-Schmidt.

    Each column is projected twice against the accepted ones; it is dropped
    when what remains has M-norm below ``drop_tol`` times its original M-norm.
    """
    if not 0.0 < drop_tol < 1.0:
        raise ValueError("drop_tol must lie in (0, 1)")
    V = np.asarray(V, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    Q: list[np.ndarray] = []
    MQ: list[np.ndarray] = []
    for j in range(V.shape[1]):
        v = V[:, j].copy()
        norm0 = np.sqrt(max(v @ (M @ v), 0.0))
        if norm0 == 0.0:
            continue
        for _ in range(2):
            for q, mq in zip(Q, MQ):
                v -= (mq @ v) * q
        mv = M @ v
        norm = np.sqrt(max(v @ mv, 0.0))
        if norm < drop_tol * norm0:
            continue
        Q.append(v / norm)
        MQ.append(mv / norm)
    if not Q:
        raise EmptyBasis("all vectors dropped during orthonormalization")
    return np.column_stack(Q)


def cg_solve(A, b, tol: float = 1e-10, maxiter: int | None = None):
    """Unpreconditioned conjugate gradients to relative residual ``tol``, capped at ``20 n`` iterations."""
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    maxiter = 20 * n if maxiter is None else maxiter
    x, info = cg(A, b, rtol=tol, atol=0.0, maxiter=maxiter)
    if info != 0:
        raise MaxIterations(f"CG did not reach {tol:g} in {maxiter} iterations")
    return x


def dump_matrix(path, A) -> None:
    scipy.io.mmwrite(str(path), sp.coo_matrix(A), symmetry="symmetric", precision=17)


def load_matrix(path) -> sp.csr_matrix:
    return sym_csr(scipy.io.mmread(str(path)))
