import pytest

from kicked_rotor import SpatialGrid, make_context


@pytest.fixture(scope="session")
def grid():
    return SpatialGrid()


@pytest.fixture(scope="session")
def small_grid():
    # 64 lattice periods, +-64 recoils: enough for the low orders property tests touch
    return SpatialGrid(n_points=2**12, n_periods=64)


@pytest.fixture(scope="session")
def rb87():
    return make_context()


@pytest.fixture(scope="session")
def sigma_w(rb87):
    """5 um packet width in units of 1/k_L."""
    return rb87.length_to_dimensionless(5e-6)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one acceptance line, then assert it."""

    def record(number, title, ok, detail):
        ACCEPTANCE_LINES.append((number, f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title} ({detail})"))
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
