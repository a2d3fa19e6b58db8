"""Q1 finite element assembly on the fine grid."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import EmptySubdomain
from .fields import PermeabilityField, SourceSpec
from .grid import CoarseFineGrid, Subdomain
from .linalg import sym_csr


def q1_element_matrices(h: float) -> tuple[np.ndarray, np.ndarray]:
    """Unit-coefficient stiffness and mass of a square Q1 element of side ``h``.

    Local nodes run counter-clockwise from the lower-left corner.  Both
    integrals use 2x2 Gauss points, which is exact for Q1 products.
    """
    g = 0.5 * (1.0 + np.array([-1.0, 1.0]) / np.sqrt(3.0))
    corners = np.array([[0, 0], [1, 0], [1, 1], [0, 1]])
    K = np.zeros((4, 4))
    Mloc = np.zeros((4, 4))
    for xi in g:
        for eta in g:
            sx = np.where(corners[:, 0] == 1, xi, 1 - xi)
            sy = np.where(corners[:, 1] == 1, eta, 1 - eta)
            phi = sx * sy
            # reference derivatives; the 1/h from the chain rule cancels with the h^2 Jacobian
            dx = np.where(corners[:, 0] == 1, 1.0, -1.0) * sy
            dy = np.where(corners[:, 1] == 1, 1.0, -1.0) * sx
            w = 0.25
            K += w * (np.outer(dx, dx) + np.outer(dy, dy))
            Mloc += w * h * h * np.outer(phi, phi)
    return K, Mloc


def _assemble_full(grid: CoarseFineGrid, cell_coef: np.ndarray, loc: np.ndarray) -> sp.csr_matrix:
    nodes = grid.cell_nodes
    rows = np.repeat(nodes, 4, axis=1).ravel()
    cols = np.tile(nodes, (1, 4)).ravel()
    data = (cell_coef[:, None] * loc.ravel()[None, :]).ravel()
    A = sp.coo_matrix((data, (rows, cols)), shape=(grid.n_nodes, grid.n_nodes))
    return sym_csr(A, check=False)


@lru_cache(maxsize=8)
def mass_full(grid: CoarseFineGrid) -> sp.csr_matrix:
    """Mass matrix on all fine nodes (before boundary elimination)."""
    _, Mloc = q1_element_matrices(grid.h)
    return _assemble_full(grid, np.ones(grid.n_cells), Mloc)


@dataclass(frozen=True, eq=False)
class FineOperators:
    """Stiffness ``A`` and mass ``M`` on free dofs, plus the unreduced matrices."""

    grid: CoarseFineGrid
    A: sp.csr_matrix
    M: sp.csr_matrix
    A_full: sp.csr_matrix
    M_full: sp.csr_matrix


def assemble(grid: CoarseFineGrid, field: PermeabilityField) -> FineOperators:
    if field.n != grid.n:
        raise ValueError(f"field has {field.n}^2 cells, grid has {grid.n}^2")
    K, _ = q1_element_matrices(grid.h)
    A_full = _assemble_full(grid, field.values, K)
    M_full = mass_full(grid)
    free = grid.free_nodes
    A = sym_csr(A_full[free][:, free], check=False)
    M = sym_csr(M_full[free][:, free], check=False)
    return FineOperators(grid, A, M, A_full, M_full)


def assemble_load(grid: CoarseFineGrid, source: SourceSpec, t: float) -> np.ndarray:
    """Load vector on free dofs: mass matrix times the nodal interpolant of f."""
    f = source.f(grid.node_coords, t)
    return (mass_full(grid) @ f)[grid.free_nodes]


def interpolate_free(grid: CoarseFineGrid, values_at_nodes: np.ndarray) -> np.ndarray:
    return np.asarray(values_at_nodes)[grid.free_nodes]


def restrict_local(ops: FineOperators, sd: Subdomain):
    """Principal submatrices of ``A`` and ``M`` on the subdomain's interior dofs."""
    if sd.n_dofs == 0:
        raise EmptySubdomain(f"subdomain {sd.index} has no interior dofs")
    idx = sd.dofs
    A_i = sym_csr(ops.A[idx][:, idx], check=False)
    M_i = sym_csr(ops.M[idx][:, idx], check=False)
    return A_i, M_i
