import math

import pytest

from gausscrit.exponents import make_config


@pytest.fixture(scope="session")
def cfg_sub():
    return make_config(1.5, 2)


@pytest.fixture(scope="session")
def cfg_crit3():
    return make_config(2.0, 3)


@pytest.fixture(scope="session")
def cfg_super():
    return make_config(2.5, 2)


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


TWO_PI = 2.0 * math.pi


_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Reporter for one acceptance criterion.

    Call it as criterion(n, ok, detail). A test that raises before reporting is
    logged as FAIL by the report hook. Every line is replayed in the terminal
    summary.
    """

    def report(n, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
        _CRITERIA.append(line)
        print(line)
        return ok

    return report


def pytest_runtest_makereport(item, call):
    if call.when == "call" and call.excinfo is not None and "criterion" in item.fixturenames:
        num = item.get_closest_marker("criterion")
        if num is not None and not any(f"criterion {num.args[0]}:" in s for s in _CRITERIA):
            _CRITERIA.append(f"FAIL criterion {num.args[0]}: {call.excinfo.typename}: {call.excinfo.value}")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
