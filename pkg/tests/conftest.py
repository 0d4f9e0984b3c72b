import pytest

from pnerr import zeta


@pytest.fixture(scope="session")
def zeros10k():
    """First 10^4 zeros with companions; built once and cached on disk."""
    return zeta.cached_zeros(10_000)


@pytest.fixture(scope="session")
def zeros2000(zeros10k):
    return zeros10k.head(2000)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion; printed in the terminal summary."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
