import mpmath
import pytest


@pytest.fixture(autouse=True)
def _ambient_precision_is_irrelevant():
    # the library must never depend on mpmath's global precision
    old = mpmath.mp.prec
    mpmath.mp.prec = 53
    yield
    mpmath.mp.prec = old


def close(a, b, tol, prec=256):
    with mpmath.workprec(prec):
        a, b = mpmath.mpmathify(a), mpmath.mpmathify(b)
        return abs(a - b) <= tol * max(1, abs(b))


# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
