import numpy as np
import pytest

from contactangle import catalog
from contactangle.catalog import Surface
from contactangle.tori import solve_minimal


class Swapped(Surface):
    """The same surface with the chart coordinates exchanged (orientation reversed)."""

    def __init__(self, inner):
        super().__init__(name=inner.name + "-swapped", u_range=inner.v_range, v_range=inner.u_range,
                         periodic=inner.periodic[::-1])
        self.inner = inner

    def __call__(self, u, v):
        return self.inner(v, u)


class Reparam(Surface):
    """The same surface in the chart (u, v) -> (u + 0.3 v, v - 0.2 u)."""

    def __init__(self, inner):
        super().__init__(name=inner.name + "-reparam")
        self.inner = inner

    def __call__(self, s, t):
        return self.inner(s + 0.3 * t, t - 0.2 * s)


@pytest.fixture(scope="session")
def legendrian():
    return catalog.legendrian_flat()


@pytest.fixture(scope="session")
def sphere():
    return catalog.great_sphere()


@pytest.fixture(scope="session")
def clifford():
    return catalog.clifford_s3()


@pytest.fixture(scope="session")
def trig_corpus():
    rng = np.random.default_rng(2024)
    return [catalog.random_trig_immersion(rng) for _ in range(10)]


@pytest.fixture(scope="session")
def b_zero_torus():
    return solve_minimal("b_zero", 1.2, seed=42)


@pytest.fixture(scope="session")
def a_zero_torus():
    return solve_minimal("a_zero", 0.9, seed=42)


@pytest.fixture(scope="session")
def free_torus():
    return solve_minimal("none", None, seed=42)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])
