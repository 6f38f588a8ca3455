import pytest

from ptspec.asymcoeff import PotentialSpec
from ptspec.shooting import spectrum


@pytest.fixture(scope="session")
def cubic_spectrum():
    """m = 3, a = 0 eigenvalues n = 0..31, shared by several modules."""
    return spectrum(PotentialSpec.zero(3), 0, 31)


_ACCEPTANCE = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for an acceptance criterion."""
    def emit(number, ok, text):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {text}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok
    return emit


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
