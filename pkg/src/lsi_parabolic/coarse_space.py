"""Global multiscale space, implicit/explicit splitting and stability diagnostics."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .assembly import FineOperators
from .errors import BadSplitCount, EmptyExplicitSpace, EmptySplit, MassNotSpd, NumericalError
from .grid import CoarseFineGrid, oversample
from .linalg import dense_sym_gen_eig
from .local_basis import LocalBasis, build_local_basis

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BasisConfig:
    method: str = "lksi"
    m: int = 4
    k: int = 4
    L: int | None = None  # None: 4 for LSSI, k for LKSI
    drop_tol: float = 1e-10


@dataclass(eq=False)
class MultiscaleSpace:
    """Prolongation ``P`` (fine free dofs x n_ms) and Galerkin matrices.

    Columns are grouped by subdomain; inside a group they are Ritz vectors in
    ascending ``theta`` order.
    """

    P: sp.csc_matrix
    owner: np.ndarray
    rank: np.ndarray
    thetas: np.ndarray
    A_c: np.ndarray
    M_c: np.ndarray
    nolp: int
    config: BasisConfig | None = None
    discarded: list = field(default_factory=list)  # per-subdomain discarded Ritz values

    @property
    def n_ms(self) -> int:
        return self.P.shape[1]

    @property
    def lambdas(self) -> np.ndarray:
        return 1.0 / self.thetas

    @property
    def n_subdomains(self) -> int:
        return int(self.owner.max()) + 1 if self.owner.size else 0

    def prolong(self, c: np.ndarray) -> np.ndarray:
        return self.P @ c

    def columns_of(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.owner == i)


def space_from_bases(bases: list[LocalBasis], ops: FineOperators, config: BasisConfig | None = None,
                     check: bool = True) -> MultiscaleSpace:
    """Scatter local bases into global columns and form ``P^T A P``, ``P^T M P``.

    With ``check`` a singular ``M_c`` (linearly dependent columns) raises
    :class:`MassNotSpd`.
    """
    rows, cols, vals = [], [], []
    owner, rank, thetas = [], [], []
    col = 0
    for b in sorted(bases, key=lambda b: b.index):
        for j in range(b.L):
            v = b.vectors[:, j]
            nz = np.flatnonzero(v)
            rows.append(b.dofs[nz])
            cols.append(np.full(nz.size, col))
            vals.append(v[nz])
            owner.append(b.index)
            rank.append(j)
            thetas.append(b.thetas[j])
            col += 1
    n_fine = ops.A.shape[0]
    P = sp.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_fine, col),
    )
    A_c, M_c = galerkin(P, ops)
    if check:
        try:
            sla.cho_factor(M_c)
        except sla.LinAlgError as exc:
            # typical cause: oversampled regions covering the whole domain give near-identical bases
            raise MassNotSpd(f"coarse mass matrix is singular, the basis is linearly dependent ({exc})") from exc
    return MultiscaleSpace(
        P=P,
        owner=np.array(owner, dtype=int),
        rank=np.array(rank, dtype=int),
        thetas=np.array(thetas),
        A_c=A_c,
        M_c=M_c,
        nolp=sum(b.nolp for b in bases),
        config=config,
        discarded=[b.discarded_thetas for b in sorted(bases, key=lambda b: b.index)],
    )


def galerkin(P, ops: FineOperators):
    A_c = (P.T @ (ops.A @ P)).toarray()
    M_c = (P.T @ (ops.M @ P)).toarray()
    return 0.5 * (A_c + A_c.T), 0.5 * (M_c + M_c.T)


def build_multiscale_space(grid: CoarseFineGrid, ops: FineOperators, cfg: BasisConfig,
                           parallel: bool = False, workers: int | None = None) -> MultiscaleSpace:
    if cfg.m < 1:
        raise ValueError("oversampling m must be >= 1")

    def one(i: int) -> LocalBasis:
        sd = oversample(grid, i, cfg.m)
        try:
            return build_local_basis(ops, sd, cfg.method, cfg.k, cfg.L, cfg.drop_tol)
        except NumericalError as exc:
            raise type(exc)(f"subdomain {i}: {exc}") from exc

    indices = range(grid.n_coarse)
    if parallel:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            bases = list(pool.map(one, indices))
    else:
        bases = [one(i) for i in indices]
    space = space_from_bases(bases, ops, cfg)
    log.info("built %s space: m=%d k=%d n_ms=%d NoLP=%d", cfg.method, cfg.m, cfg.k, space.n_ms, space.nolp)
    return space


@dataclass(eq=False)
class SplitSpace:
    """Implicit columns ``i1`` and explicit columns ``i2`` of a multiscale space.

    The split works in coordinates ``y = (y1, y2)`` related to the original
    coarse coefficients by ``c = T y``.  Without orthogonalization ``T`` only
    reorders columns.  With it, every implicit column has its mass projection
    onto the explicit span subtracted, so the two subspaces are mass-orthogonal
    while their sum is still the whole space.
    """

    space: MultiscaleSpace
    i1: np.ndarray
    i2: np.ndarray
    T: np.ndarray
    A_t: np.ndarray
    M_t: np.ndarray
    orthogonal: bool = False

    @property
    def n1(self) -> int:
        return self.i1.size

    def _blocks(self, X):
        n1 = self.n1
        return X[:n1, :n1], X[:n1, n1:], X[n1:, n1:]

    @property
    def A11(self):
        return self._blocks(self.A_t)[0]

    @property
    def A12(self):
        return self._blocks(self.A_t)[1]

    @property
    def A22(self):
        return self._blocks(self.A_t)[2]

    @property
    def M11(self):
        return self._blocks(self.M_t)[0]

    @property
    def M12(self):
        return self._blocks(self.M_t)[1]

    @property
    def M22(self):
        return self._blocks(self.M_t)[2]

    def to_split(self, c: np.ndarray) -> np.ndarray:
        return np.linalg.solve(self.T, c)

    def from_split(self, y: np.ndarray) -> np.ndarray:
        return self.T @ y

    def explicit_counts(self) -> np.ndarray:
        return np.bincount(self.space.owner[self.i2], minlength=self.space.n_subdomains)


def _split_transform(space: MultiscaleSpace, i1, i2, orthogonalize: bool):
    n = space.n_ms
    T = np.zeros((n, n))
    T[i1, np.arange(i1.size)] = 1.0
    T[i2, i1.size + np.arange(i2.size)] = 1.0
    if orthogonalize and i1.size and i2.size:
        M22 = space.M_c[np.ix_(i2, i2)]
        M21 = space.M_c[np.ix_(i2, i1)]
        E = sla.cho_solve(sla.cho_factor(M22), M21)
        T[np.ix_(i2, np.arange(i1.size))] = -E
    A_t = T.T @ space.A_c @ T
    M_t = T.T @ space.M_c @ T
    return T, 0.5 * (A_t + A_t.T), 0.5 * (M_t + M_t.T)


def auto_split_counts(space: MultiscaleSpace) -> np.ndarray:
    """Per subdomain, ``l_i`` at the largest ratio of consecutive ``lambda`` estimates."""
    counts = np.zeros(space.n_subdomains, dtype=int)
    for i in range(space.n_subdomains):
        cols = space.columns_of(i)
        lam = np.sort(space.lambdas[cols])[::-1]
        if lam.size < 2:
            counts[i] = lam.size
            continue
        ratios = lam[:-1] / lam[1:]
        counts[i] = int(np.argmax(ratios)) + 1
    return counts


def split_space(space: MultiscaleSpace, l, extra_explicit=(), orthogonalize: bool = True) -> SplitSpace:
    """Send the ``l_i`` columns with the largest ``lambda`` of each subdomain to the explicit set.

    ``l`` is an int (uniform), ``"auto"`` (largest spectral gap) or a
    per-subdomain sequence.  ``extra_explicit`` lists additional global
    columns forced into the explicit set.  ``orthogonalize`` makes the
    implicit subspace mass-orthogonal to the explicit one.
    """
    nsub = space.n_subdomains
    if isinstance(l, str):
        if l != "auto":
            raise BadSplitCount(f"unknown split mode {l!r}")
        counts = auto_split_counts(space)
    else:
        counts = np.broadcast_to(np.asarray(l, dtype=int), (nsub,))
    explicit = np.zeros(space.n_ms, dtype=bool)
    for i in range(nsub):
        cols = space.columns_of(i)
        if not 0 <= counts[i] <= cols.size:
            raise BadSplitCount(f"subdomain {i}: l_i={counts[i]} but L_i={cols.size}")
        order = cols[np.argsort(space.thetas[cols], kind="stable")]
        explicit[order[:counts[i]]] = True
    explicit[np.asarray(extra_explicit, dtype=int)] = True
    i1, i2 = np.flatnonzero(~explicit), np.flatnonzero(explicit)
    T, A_t, M_t = _split_transform(space, i1, i2, orthogonalize)
    return SplitSpace(space, i1, i2, T, A_t, M_t, orthogonal=orthogonalize and i1.size > 0 and i2.size > 0)


def explicit_rayleigh_quotient(split: SplitSpace) -> float:
    """Largest ``|v|_a^2 / |v|^2`` over the explicit subspace."""
    if split.i2.size == 0:
        raise EmptyExplicitSpace("explicit index set is empty")
    thetas, _ = dense_sym_gen_eig(split.A22, split.M22)
    return float(thetas[-1])


def cauchy_schwarz_gamma(split: SplitSpace) -> float:
    """Cosine of the minimal mass-inner-product angle between the two subspaces."""
    if split.i1.size == 0 or split.i2.size == 0:
        raise EmptySplit("both index sets must be nonempty")
    C1 = sla.cholesky(split.M11, lower=True)
    C2 = sla.cholesky(split.M22, lower=True)
    G = sla.solve_triangular(C1, split.M12, lower=True)
    G = sla.solve_triangular(C2, G.T, lower=True).T
    return float(np.linalg.norm(G, 2))


def stability_limit(rq: float, gamma: float, omega: float) -> float:
    """Largest stable time step of the partially explicit scheme."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    if not 0.0 <= omega <= 1.0:
        raise ValueError(f"omega must lie in [0, 1], got {omega}")
    if rq <= 0.0:
        raise ValueError("Rayleigh quotient must be positive")
    return (1.0 - gamma**2) / ((2.0 - omega) * rq)
