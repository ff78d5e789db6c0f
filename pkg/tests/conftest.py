import time

import pytest

from chemoblowup.config import RunConfig
from chemoblowup.exponents import Exponents
from chemoblowup.harness import standard_toy_sim
from chemoblowup.model import make_params
from chemoblowup.subsolution import derive_constants

# filled by test_acceptance, echoed in the terminal summary
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def p0():
    return make_params(3, 1.0, 1.1, 1.1)


@pytest.fixture(scope="session")
def ref_exp():
    return Exponents(0.1, 0.1, 0.45)


@pytest.fixture(scope="session")
def p0_theory(p0, ref_exp):
    return derive_constants(p0, ref_exp)


@pytest.fixture(scope="session")
def p0_toy(p0, ref_exp):
    return derive_constants(p0, ref_exp, y0=1e3, theta=1.0)


_ANCHORS = {}
ANCHOR_SECONDS = {}


def anchor_run(m1, m2):
    """Standardized toy run, computed once per session (the (2, 2) run takes about a minute)."""
    key = (m1, m2)
    if key not in _ANCHORS:
        start = time.perf_counter()
        _ANCHORS[key] = standard_toy_sim(RunConfig(), m1, m2)
        ANCHOR_SECONDS[key] = time.perf_counter() - start
    return _ANCHORS[key]


@pytest.fixture(scope="session")
def anchors():
    return anchor_run
