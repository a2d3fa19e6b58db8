"""Two-level structured quadrilateral grids on the unit square.

Fine node ``(ix, iy)`` has index ``iy * (n + 1) + ix`` with ``n = nc * r``
fine cells per side; fine cell ``(cx, cy)`` has index ``cy * n + cx``; coarse
cell ``(Cx, Cy)`` has index ``Cy * nc + Cx``.  Free dofs are the interior
nodes numbered row by row, ``(iy - 1) * (n - 1) + (ix - 1)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True, eq=False)
class CoarseFineGrid:
    nc: int
    r: int

    def __post_init__(self):
        if self.nc < 2 or self.r < 2:
            raise ValueError(f"need nc >= 2 and r >= 2, got nc={self.nc}, r={self.r}")

    @property
    def n(self) -> int:
        return self.nc * self.r

    @property
    def H(self) -> float:
        return 1.0 / self.nc

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def n_nodes(self) -> int:
        return (self.n + 1) ** 2

    @property
    def n_free(self) -> int:
        return (self.n - 1) ** 2

    @property
    def n_cells(self) -> int:
        return self.n**2

    @property
    def n_coarse(self) -> int:
        return self.nc**2

    def node_index(self, ix, iy):
        return np.asarray(iy) * (self.n + 1) + np.asarray(ix)

    def free_of(self, ix, iy):
        """Free-dof index of interior node(s) ``(ix, iy)``."""
        return (np.asarray(iy) - 1) * (self.n - 1) + (np.asarray(ix) - 1)

    @cached_property
    def free_nodes(self) -> np.ndarray:
        """Global node index of every free dof, in free-dof order."""
        i = np.arange(1, self.n)
        ix, iy = np.meshgrid(i, i)
        return self.node_index(ix, iy).ravel()

    @cached_property
    def node_coords(self) -> np.ndarray:
        t = np.linspace(0.0, 1.0, self.n + 1)
        x, y = np.meshgrid(t, t)
        return np.column_stack([x.ravel(), y.ravel()])

    @cached_property
    def free_coords(self) -> np.ndarray:
        return self.node_coords[self.free_nodes]

    @cached_property
    def cell_nodes(self) -> np.ndarray:
        """(n_cells, 4) node indices, counter-clockwise from the lower-left corner."""
        c = np.arange(self.n)
        cx, cy = np.meshgrid(c, c)
        cx, cy = cx.ravel(), cy.ravel()
        return np.column_stack([
            self.node_index(cx, cy),
            self.node_index(cx + 1, cy),
            self.node_index(cx + 1, cy + 1),
            self.node_index(cx, cy + 1),
        ])

    @cached_property
    def cell_to_coarse(self) -> np.ndarray:
        c = np.arange(self.n)
        cx, cy = np.meshgrid(c, c)
        return ((cy // self.r) * self.nc + cx // self.r).ravel()

    def coarse_ij(self, i: int) -> tuple[int, int]:
        return i % self.nc, i // self.nc


def build_grid(nc: int, r: int) -> CoarseFineGrid:
    return CoarseFineGrid(nc, r)


@dataclass(frozen=True, eq=False)
class Subdomain:
    """Oversampled region ``omega_i`` around coarse cell ``K_i``.

    ``box = (x0, x1, y0, y1)`` in coarse-cell units, half-open.  ``dofs`` are
    the global free dofs strictly inside ``omega_i`` (ascending, so position
    in ``dofs`` is the local index); ``central`` are local indices of the
    nodes of the closed cell ``K_i`` among them.
    """

    grid: CoarseFineGrid
    index: int
    m: int
    box: tuple[int, int, int, int]
    dofs: np.ndarray
    central: np.ndarray

    @property
    def n_dofs(self) -> int:
        return self.dofs.size

    def to_local(self, global_dofs) -> np.ndarray:
        g = np.asarray(global_dofs)
        pos = np.searchsorted(self.dofs, g)
        pos = np.minimum(pos, self.dofs.size - 1)
        if self.dofs.size == 0 or not np.all(self.dofs[pos] == g):
            raise KeyError("dof not interior to subdomain")
        return pos

    def to_global(self, local) -> np.ndarray:
        return self.dofs[np.asarray(local)]


def coarse_box(grid: CoarseFineGrid, i: int, m: int) -> tuple[int, int, int, int]:
    cx, cy = grid.coarse_ij(i)
    nc = grid.nc
    return max(cx - m, 0), min(cx + m + 1, nc), max(cy - m, 0), min(cy + m + 1, nc)


def oversample(grid: CoarseFineGrid, i: int, m: int) -> Subdomain:
    if not 0 <= i < grid.n_coarse:
        raise IndexError(f"coarse cell {i} out of range")
    if m < 0:
        raise ValueError("m must be nonnegative")
    r = grid.r
    x0, x1, y0, y1 = coarse_box(grid, i, m)
    ix = np.arange(x0 * r + 1, x1 * r)
    iy = np.arange(y0 * r + 1, y1 * r)
    IX, IY = np.meshgrid(ix, iy)
    dofs = grid.free_of(IX, IY).ravel()

    cx, cy = grid.coarse_ij(i)
    inside_x = (IX >= cx * r) & (IX <= (cx + 1) * r)
    inside_y = (IY >= cy * r) & (IY <= (cy + 1) * r)
    central = np.flatnonzero((inside_x & inside_y).ravel())
    return Subdomain(grid, i, m, (x0, x1, y0, y1), dofs, central)


def overlap_count(grid: CoarseFineGrid, m: int) -> int:
    """Largest number of subdomains covering one fine cell."""
    cover = np.zeros((grid.nc, grid.nc), dtype=int)
    for i in range(grid.n_coarse):
        x0, x1, y0, y1 = coarse_box(grid, i, m)
        cover[y0:y1, x0:x1] += 1
    return int(cover.max())
