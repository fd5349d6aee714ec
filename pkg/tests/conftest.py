import pytest

from weighted_partitions.numtheory import build_sieve

_REPORT: dict[int, str] = {}


@pytest.fixture(scope="session")
def sieve_small():
    return build_sieve(200_000)


@pytest.fixture
def criterion():
    """Record a one-line PASS/FAIL verdict for an acceptance criterion."""

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _REPORT[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_REPORT):
        terminalreporter.write_line(_REPORT[n])
