import warnings

import numpy as np
import pytest
import scipy.linalg as sla
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from lsi_parabolic.assembly import assemble, restrict_local
from lsi_parabolic.errors import DegenerateInit, InsufficientVectors, KrylovBreakdown, TooLarge
from lsi_parabolic.fields import generate_field
from lsi_parabolic.grid import build_grid, oversample
from lsi_parabolic.linalg import factorize_spd, m_orthonormalize
from lsi_parabolic.local_basis import (
    build_local_basis,
    initial_functions,
    krylov_vectors,
    lksi_iterate,
    lssi_iterate,
    local_eig_oracle,
    rayleigh_ritz_select,
)


@pytest.fixture(scope="module")
def interior10():
    g = build_grid(10, 10)
    ops = assemble(g, generate_field(g, "constant"))
    return ops, oversample(g, 44, 1)


@pytest.fixture(scope="module")
def unit_square_local():
    g = build_grid(4, 6)
    ops = assemble(g, generate_field(g, "constant"))
    sd = oversample(g, 5, 1)
    return restrict_local(ops, sd), sd, ops


def max_principal_angle(U, V, M):
    Qu = m_orthonormalize(U, M)
    Qv = m_orthonormalize(V, M)
    s = np.linalg.svd(Qu.T @ (M @ Qv), compute_uv=False)
    return float(np.arccos(np.clip(s.min(), -1, 1)))


# -- initial functions

def test_lksi_indicator_121(interior10):
    _, sd = interior10
    v = initial_functions(sd, "lksi")
    assert v.shape[1] == 1
    assert np.count_nonzero(v) == 121


def test_lksi_indicator_clipped_at_boundary():
    g = build_grid(10, 10)
    sd = oversample(g, 0, 1)
    assert np.count_nonzero(initial_functions(sd, "lksi")) == 100  # 10x10: two edges on the boundary


def test_lssi_hats(interior10):
    _, sd = interior10
    V = initial_functions(sd, "lssi")
    assert V.shape[1] == 4
    assert np.linalg.det(V.T @ V) > 0
    total = V.sum(axis=1)
    np.testing.assert_allclose(total[sd.central], 1.0, atol=1e-14)
    mask = np.ones(sd.n_dofs, dtype=bool)
    mask[sd.central] = False
    assert np.all(total[mask] == 0.0)


def test_unknown_method(interior10):
    with pytest.raises(ValueError):
        initial_functions(interior10[1], "lobpcg")


# -- LSSI

def test_lssi_k0_keeps_initial_span(unit_square_local):
    (A, M), sd, _ = unit_square_local
    Phi0 = initial_functions(sd, "lssi")
    b = lssi_iterate(A, M, Phi0, 0)
    assert max_principal_angle(b.vectors, Phi0, M) < 1e-7
    assert b.nolp == 0


def test_lssi_toy_iterate_direction():
    A = sp.diags([1.0, 10.0])
    hist = []
    lssi_iterate(A, sp.identity(2), np.array([1.0, 1.0]), 1, history=hist)
    v = hist[1][:, 0]
    assert abs(v[0] * 0.1 - v[1] * 1.0) < 1e-14 * np.abs(v).max()


def test_lssi_angles_shrink(unit_square_local):
    (A, M), sd, _ = unit_square_local
    _, W = local_eig_oracle(A, M, 4)
    Phi0 = initial_functions(sd, "lssi")
    a1 = max_principal_angle(lssi_iterate(A, M, Phi0, 1).vectors, W, M)
    a3 = max_principal_angle(lssi_iterate(A, M, Phi0, 3).vectors, W, M)
    assert a3 < a1


def test_lssi_constraints_and_subspace(unit_square_local):
    (A, M), sd, _ = unit_square_local
    hist = []
    lssi_iterate(A, M, initial_functions(sd, "lssi"), 3, history=hist)
    for prev, nxt in zip(hist[:-1], hist[1:]):
        np.testing.assert_allclose((M @ prev).T @ nxt, np.eye(4), atol=1e-8)
        R = A @ nxt
        B = M @ prev
        coef, *_ = np.linalg.lstsq(B, R, rcond=None)
        assert np.linalg.norm(B @ coef - R) <= 1e-8 * np.linalg.norm(R)


def test_lssi_basis_invariants(unit_square_local):
    (A, M), sd, _ = unit_square_local
    b = lssi_iterate(A, M, initial_functions(sd, "lssi"), 4)
    np.testing.assert_allclose(b.vectors.T @ (M @ b.vectors), np.eye(4), atol=1e-8)
    assert np.all(np.diff(b.thetas) >= 0)
    np.testing.assert_allclose(b.lambdas, 1 / b.thetas)
    assert b.nolp == 16


# -- LKSI

def test_lksi_toy_first_iterate():
    psi = krylov_vectors(sp.diags([1.0, 2.0]), sp.identity(2), np.array([1.0, 1.0]), 1)
    np.testing.assert_allclose(psi[:, 0], [2 / 3, 1 / 3], rtol=1e-14)


def test_lksi_eigenvector_breakdown():
    A = sp.diags([1.0, 2.0, 3.0])
    with pytest.warns(KrylovBreakdown, match="s=2"):
        b = lksi_iterate(A, sp.identity(3), np.array([0.0, 1.0, 0.0]), 3)
    assert b.breakdown and b.L == 1
    assert b.thetas[0] == pytest.approx(2.0)


def test_lksi_constraints_and_direction(unit_square_local):
    (A, M), sd, _ = unit_square_local
    psi0 = initial_functions(sd, "lksi")[:, 0]
    P = krylov_vectors(A, M, psi0, 5)
    fact = factorize_spd(A)
    cols = [psi0] + [P[:, j] for j in range(5)]
    for prev, nxt in zip(cols[:-1], cols[1:]):
        assert prev @ (M @ nxt) == pytest.approx(1.0, abs=1e-8)
        raw = fact.solve(M @ prev)
        cos = (raw @ nxt) / (np.linalg.norm(raw) * np.linalg.norm(nxt))
        assert cos == pytest.approx(1.0, abs=1e-8)


def test_lksi_keeps_k_vectors(unit_square_local):
    (A, M), sd, _ = unit_square_local
    b = lksi_iterate(A, M, initial_functions(sd, "lksi")[:, 0], 4)
    assert b.L == 4 and b.nolp == 4 and not b.breakdown
    np.testing.assert_allclose(b.vectors.T @ (M @ b.vectors), np.eye(4), atol=1e-8)
    b2 = lksi_iterate(A, M, initial_functions(sd, "lksi")[:, 0], 4, L=2)
    assert b2.L == 2 and b2.discarded_thetas.size == 2
    np.testing.assert_allclose(b2.thetas, b.thetas[:2], rtol=1e-10)


def test_lksi_zero_init():
    with pytest.raises(DegenerateInit):
        lksi_iterate(sp.identity(2), sp.identity(2), np.zeros(2), 2)
    with pytest.raises(ValueError):
        lksi_iterate(sp.identity(2), sp.identity(2), np.ones(2), 0)


# -- Rayleigh-Ritz selection

def test_select_full_is_identity():
    A = np.diag([3.0, 1.0, 2.0])
    V = m_orthonormalize(np.random.default_rng(0).standard_normal((3, 2)), np.eye(3))
    vec, th, disc = rayleigh_ritz_select(V, A, np.eye(3), 2)
    ref = np.linalg.eigvalsh(V.T @ A @ V)
    np.testing.assert_allclose(th, ref, rtol=1e-12)
    assert disc.size == 0


def test_select_exact_eigvecs():
    A = np.diag([5.0, 1.0, 3.0, 2.0])
    vec, th, disc = rayleigh_ritz_select(np.eye(4), A, np.eye(4), 2)
    np.testing.assert_allclose(th, [1.0, 2.0])
    np.testing.assert_allclose(np.abs(vec[[1, 3]]), np.eye(2))
    np.testing.assert_allclose(disc, [3.0, 5.0])


def test_select_insufficient():
    with pytest.raises(InsufficientVectors):
        rayleigh_ritz_select(np.eye(3)[:, :1], np.eye(3), np.eye(3), 2)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**16), L=st.integers(1, 3))
def test_select_matches_projected_oracle(seed, L):
    rng = np.random.default_rng(seed)
    n = 6
    A = np.diag(rng.uniform(1, 10, n))
    V = m_orthonormalize(rng.standard_normal((n, 3)), np.eye(n))
    _, th, _ = rayleigh_ritz_select(V, A, np.eye(n), L)
    ref = sla.eigh(V.T @ A @ V, eigvals_only=True)[:L]
    np.testing.assert_allclose(th, ref, rtol=1e-10)


# -- oracle

def test_oracle_unit_square():
    g = build_grid(4, 10)
    ops = assemble(g, generate_field(g, "constant"))
    th, V = local_eig_oracle(ops.A, ops.M, 4)
    pi2 = np.pi**2
    np.testing.assert_allclose(th, [2 * pi2, 5 * pi2, 5 * pi2, 8 * pi2], rtol=0.02)
    assert np.all(np.diff(th) >= 0)
    np.testing.assert_allclose(V.T @ (ops.M @ V), np.eye(4), atol=1e-10)


def test_oracle_too_large():
    with pytest.raises(TooLarge):
        local_eig_oracle(sp.identity(12001), sp.identity(12001), 1)


def test_build_local_basis_records(hetero_ops):
    sd = oversample(hetero_ops.grid, 12, 2)
    b = build_local_basis(hetero_ops, sd, "lssi", 2)
    assert b.index == 12 and np.array_equal(b.dofs, sd.dofs) and b.L == 4 and b.nolp == 8
    with pytest.raises(ValueError):
        build_local_basis(hetero_ops, sd, "qr", 2)
