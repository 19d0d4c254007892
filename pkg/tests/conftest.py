import numpy as np
import pytest

from alphafr.grid import make_line, make_periodic


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def g64():
    return make_periodic(64)


@pytest.fixture(scope="session")
def g128():
    return make_periodic(128)


@pytest.fixture(scope="session")
def line1024():
    return make_line(1024, 10.0, 4.0)


def fine_quad(f, n=20000):
    """Midpoint rule on [0, 1] at a much finer resolution than the code under test."""
    x = (np.arange(n) + 0.5) / n
    return float(np.mean(f(x)))


# --- acceptance reporting ------------------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    number, title = mark.args
    detail = "; ".join(f"{k}={v}" for k, v in item.user_properties)
    _CRITERIA[number] = (title, rep.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, passed, detail = _CRITERIA[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status} criterion {number}: {title}" + (f" [{detail}]" if detail else ""))
