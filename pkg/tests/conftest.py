import pytest

from bhdirac.minimax import find_saddle, spectrum

ALPHA = 0.1

_REPORT: list[str] = []


@pytest.fixture(scope="session")
def saddle_m1():
    return find_saddle(ALPHA, -1)


@pytest.fixture(scope="session")
def saddle_p1():
    return find_saddle(ALPHA, 1)


@pytest.fixture(scope="session")
def phi3_runs(saddle_m1, saddle_p1):
    """Phi3 (n=14, i.e. 18 functions per component) spectra with shooting checks for k = -1, +1."""
    return {
        -1: spectrum(ALPHA, -1, "Phi3", 14, saddle=saddle_m1, check_spurious=True, levels=3),
        1: spectrum(ALPHA, 1, "Phi3", 14, saddle=saddle_p1, check_spurious=True, levels=3),
    }


@pytest.fixture(scope="session")
def criterion():
    """Record one pass/fail line per acceptance criterion."""

    def record(label: str, ok: bool, detail: str = "") -> bool:
        _REPORT.append(f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  [{detail}]" if detail else ""))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)
