import numpy as np
import pytest

from tdeim.tensor import tproduct
from tdeim.tsvd import truncated_tsvd


def random_low_rank(rng, shape, rank):
    """``A * B`` with ``A: I1 x R x I3`` and ``B: R x I2 x I3`` Gaussian, tubal rank <= R."""
    n1, n2, n3 = shape
    a = rng.standard_normal((n1, rank, n3))
    b = rng.standard_normal((rank, n2, n3))
    return tproduct(a, b)


def random_basis(rng, n1, rank, n3):
    """Orthonormal tubal basis from the t-SVD of a random tensor."""
    x = rng.standard_normal((n1, n1, n3))
    return truncated_tsvd(x, rank, method="lapack").U


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE = {}


def record(number, passed, detail):
    """Store one acceptance line; printed in the terminal summary."""
    ACCEPTANCE[number] = (bool(passed), detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})")
