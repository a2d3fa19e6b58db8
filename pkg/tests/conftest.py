import numpy as np
import pytest

from lsi_parabolic.assembly import assemble
from lsi_parabolic.fields import generate_field
from lsi_parabolic.grid import build_grid


@pytest.fixture(scope="session")
def small_grid():
    return build_grid(4, 4)


@pytest.fixture(scope="session")
def unit_ops(small_grid):
    return assemble(small_grid, generate_field(small_grid, "constant"))


@pytest.fixture(scope="session")
def hetero_ops():
    grid = build_grid(5, 6)
    return assemble(grid, generate_field(grid, "inclusions", contrast=1e3, seed=3))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def laplacian_2d(k):
    """Five-point Laplacian on a k x k interior grid."""
    import scipy.sparse as sp

    T = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(k, k))
    I = sp.identity(k)
    return sp.csr_matrix(sp.kron(I, T) + sp.kron(T, I))


# -- acceptance reporting: one PASS/FAIL line per criterion

ACCEPTANCE: dict = {}


@pytest.fixture
def criterion(request):
    state = {}

    def record(number: int, ok: bool, detail: str = ""):
        state["number"] = number
        ACCEPTANCE[number] = (bool(ok), detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")

    yield record
    if "number" not in state:
        marker = request.node.get_closest_marker("criterion")
        if marker is not None:
            ACCEPTANCE[marker.args[0]] = (False, "did not complete")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
