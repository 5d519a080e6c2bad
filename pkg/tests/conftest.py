import numpy as np
import pytest

from hatlab.potential import default_table


@pytest.fixture(scope="session")
def table():
    return default_table(256)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for an acceptance criterion and echo it."""

    def _report(number, title: str, passed: bool, detail: str) -> bool:
        line = f"criterion {number:>3}: {'PASS' if passed else 'FAIL'}  {title}  [{detail}]"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: (int(s.split(":")[0].split()[1].rstrip("ab")), s)):
            terminalreporter.write_line(line)
