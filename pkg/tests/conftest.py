import numpy as np
import pytest
from hypothesis import strategies as st

from latticetail.linalg import qrd


def random_h(rng, n, m):
    return (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / np.sqrt(2 * m)


@st.composite
def complex_matrices(draw, min_m=1, max_m=4, tall=True):
    """Well-conditioned random complex matrices with N in {M, M+1}."""
    m = draw(st.integers(min_m, max_m))
    n = m + (draw(st.integers(0, 1)) if tall else 0)
    seed = draw(st.integers(0, 2**32 - 1))
    h = random_h(np.random.default_rng(seed), n, m)
    return h


@st.composite
def triangular_systems(draw, max_m=3):
    """(R, y, rho) with R the positive-diagonal QR factor of a random matrix."""
    h = draw(complex_matrices(max_m=max_m))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    m = h.shape[1]
    r = qrd(h).r
    y = (rng.standard_normal(m) + 1j * rng.standard_normal(m)) * draw(st.floats(0.05, 2.0))
    rho = draw(st.floats(0.1, 1.2))
    return r, y, rho


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
