import numpy as np
import pytest
import scipy.sparse as sp

from lsi_parabolic.assembly import (
    assemble,
    assemble_load,
    interpolate_free,
    mass_full,
    q1_element_matrices,
    restrict_local,
)
from lsi_parabolic.errors import EmptySubdomain
from lsi_parabolic.fields import SourceSpec, generate_field
from lsi_parabolic.grid import Subdomain, build_grid, oversample
from lsi_parabolic.linalg import factorize_spd
from lsi_parabolic.local_basis import local_eig_oracle


def test_element_matrices():
    K, M = q1_element_matrices(0.5)
    np.testing.assert_allclose(np.diag(K), 2 / 3)
    np.testing.assert_allclose(K.sum(axis=1), 0.0, atol=1e-15)
    np.testing.assert_allclose(M.sum(), 0.25)
    np.testing.assert_allclose(M[0], 0.25 * np.array([4, 2, 1, 2]) / 36)


def test_single_free_dof_by_hand():
    # one interior node shared by four elements of side h = 1/2
    h = 0.5
    K, M = q1_element_matrices(h)
    corner = [0, 1, 2, 3]  # the shared node sits at a different corner in each element
    A = sum(K[c, c] for c in corner)
    Mc = sum(M[c, c] for c in corner)
    assert A == pytest.approx(8 / 3, rel=1e-14)
    assert Mc == pytest.approx(4 * h * h / 9, rel=1e-14)


def test_centre_dof_on_small_grid():
    g = build_grid(2, 2)
    ops = assemble(g, generate_field(g, "constant"))
    c = g.free_of(2, 2)
    assert ops.A[c, c] == pytest.approx(8 / 3)
    assert ops.M[c, c] == pytest.approx(4 * g.h**2 / 9)


def test_full_matrices(unit_ops):
    np.testing.assert_allclose(np.asarray(unit_ops.A_full.sum(axis=1)).ravel(), 0.0, atol=1e-12)
    assert unit_ops.M_full.sum() == pytest.approx(1.0, rel=1e-13)
    assert unit_ops.M_full.min() >= 0.0


def test_operators_spd(hetero_ops):
    for X in (hetero_ops.A, hetero_ops.M):
        assert abs(X - X.T).max() <= 1e-12 * abs(X).max()
        factorize_spd(X)


def test_kappa_scaling(small_grid):
    f = generate_field(small_grid, "channels", 50.0, seed=4)
    a = assemble(small_grid, f)
    b = assemble(small_grid, f.scaled(7.0))
    assert abs(b.A - 7.0 * a.A).max() <= 1e-12 * abs(b.A).max()
    assert abs(b.M - a.M).max() == 0.0


def test_load_zero_and_constant(small_grid):
    assert np.all(assemble_load(small_grid, SourceSpec("zero"), 0.0) == 0.0)
    b = assemble_load(small_grid, SourceSpec("constant", 1.0), 0.0)
    full = np.asarray(mass_full(small_grid).sum(axis=1)).ravel()
    np.testing.assert_allclose(b, full[small_grid.free_nodes])
    assert 0.0 < b.sum() < 1.0


def test_sine_load_symmetric():
    g = build_grid(10, 10)
    b = assemble_load(g, SourceSpec(), 0.0).reshape(g.n - 1, g.n - 1)
    np.testing.assert_allclose(b, b.T, atol=1e-12 * np.abs(b).max())


def test_manufactured_convergence():
    errs, hs = [], []
    src = SourceSpec()
    for nc in (4, 8, 16, 32):
        g = build_grid(nc, 2)
        ops = assemble(g, generate_field(g, "constant"))
        u = factorize_spd(ops.A).solve(assemble_load(g, src, 0.0))
        xy = g.free_coords
        exact = np.sin(np.pi * xy[:, 0]) * np.sin(np.pi * xy[:, 1])
        d = u - exact
        errs.append(np.sqrt(d @ (ops.M @ d)))
        hs.append(g.h)
    orders = np.diff(np.log(errs)) / np.diff(np.log(hs))
    assert orders.min() >= 1.9, orders


def test_restrict_whole_domain(unit_ops):
    g = unit_ops.grid
    whole = Subdomain(g, 0, 99, (0, g.nc, 0, g.nc), np.arange(g.n_free), np.arange(0))
    A_i, M_i = restrict_local(unit_ops, whole)
    assert abs(A_i - unit_ops.A).max() == 0.0
    assert abs(M_i - unit_ops.M).max() == 0.0


def test_disjoint_subdomains(small_grid):
    a = oversample(small_grid, 0, 0)
    b = oversample(small_grid, small_grid.n_coarse - 1, 0)
    assert np.intersect1d(a.dofs, b.dofs).size == 0


def test_empty_subdomain(unit_ops):
    g = unit_ops.grid
    sd = Subdomain(g, 0, 0, (0, 1, 0, 1), np.zeros(0, dtype=int), np.zeros(0, dtype=int))
    with pytest.raises(EmptySubdomain):
        restrict_local(unit_ops, sd)


def test_local_dirichlet_eigenvalue():
    g = build_grid(5, 16)
    ops = assemble(g, generate_field(g, "constant"))
    sd = oversample(g, 12, 1)  # 3x3 coarse cells, side 0.6 = 48 fine cells
    s = 3 * g.H
    th, _ = local_eig_oracle(*restrict_local(ops, sd), 1)
    assert th[0] == pytest.approx(2 * np.pi**2 / s**2, rel=0.02)


def test_interpolate_free(small_grid):
    vals = np.arange(small_grid.n_nodes, dtype=float)
    np.testing.assert_array_equal(interpolate_free(small_grid, vals), small_grid.free_nodes)
