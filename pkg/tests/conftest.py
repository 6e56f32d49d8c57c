import sys
from fractions import Fraction
from pathlib import Path

import pytest

from trace_census.field import build_field
from trace_census.units import find_units, totally_positive_gens

DATA = Path(__file__).parent / "data"
FIELDS = Path(__file__).parent.parent / "fields"
sys.path.insert(0, str(Path(__file__).parent))

K257_POLY = (1, 2, -3, -1)
K49_POLY = (1, -1, -2, 1)
K81_POLY = (1, 0, -3, 1)

# acceptance lines collected by test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []
TIMINGS: dict[str, float] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def k257():
    return build_field(K257_POLY)


@pytest.fixture(scope="session")
def k49():
    return build_field(K49_POLY)


@pytest.fixture(scope="session")
def k81():
    return build_field(K81_POLY)


@pytest.fixture(scope="session")
def us257(k257):
    return find_units(k257, 2.0, 40)


@pytest.fixture(scope="session")
def us49(k49):
    return find_units(k49, 2.0, 40)


@pytest.fixture(scope="session")
def us81(k81):
    return find_units(k81, 2.0, 40)


@pytest.fixture(scope="session")
def tp257(us257):
    return totally_positive_gens(us257)


@pytest.fixture(scope="session")
def series257(k257):
    import time

    from trace_census.counting import error_series

    t0 = time.perf_counter()
    s = error_series(k257, 100_000)
    TIMINGS["series257"] = time.perf_counter() - t0
    return s


@pytest.fixture(scope="session")
def stream257(k257, us257):
    from trace_census.lseries import enumerate_principal

    # enough for l_value at B = 4e4 (norms up to 70 B)
    return enumerate_principal(k257, us257, 70 * 40_000)


def read_regulators():
    out = {}
    for line in (DATA / "regulators.txt").read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            d, r, src = (t.strip() for t in line.split(",", 2))
            out[int(d)] = (float(r), src)
    return out


def read_census():
    rows = []
    for line in (DATA / "census_d1000.txt").read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        d, poly, *basis = (t.strip() for t in line.split(";"))
        coeffs = [1] + [int(t) for t in poly.split(",")]
        if basis == ["-"]:
            b = None
        else:
            b = [[Fraction(t) for t in row.split(",")] for row in basis]
        rows.append((int(d), coeffs, b))
    return rows
