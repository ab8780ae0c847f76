import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sectorthin.geometry import GeometryConfig, build_layout  # noqa: E402


@pytest.fixture(scope="session")
def layout15():
    return build_layout(GeometryConfig(15))


@pytest.fixture(scope="session")
def layout8():
    return build_layout(GeometryConfig(8))


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line, then assert."""
    def check(label, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
