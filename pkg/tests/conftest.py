import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rareexit import EscapeProblem, ExitDomain, double_well_model, linear_model

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def lin():
    """Linear model c = sbar = 1 on (-1, 1)."""
    return EscapeProblem(linear_model(), ExitDomain.symmetric(1.0))


@pytest.fixture(scope="session")
def lin_one():
    return EscapeProblem(linear_model(), ExitDomain.one_sided(1.0))


@pytest.fixture(scope="session")
def dw():
    """Double well started at -1, exit from (-1.4, -0.23)."""
    return EscapeProblem(double_well_model(), ExitDomain.two_sided(-1.4, -0.23))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# --- acceptance report ----------------------------------------------------------------

_CRITERIA: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    n, title = mark.args
    entry = _CRITERIA.setdefault(n, [title, True, []])
    if rep.failed:
        entry[1] = False
    if rep.when == "call":
        entry[2] += [v for k, v in item.user_properties if k == "measured"]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, ok, notes = _CRITERIA[n]
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}")
        for note in notes:
            tr.write_line(f"              {note}")
