import pytest
from hypothesis import settings

# fixed example generation keeps every run of the suite identical
settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")

CRITERIA = {}


@pytest.fixture
def criterion():
    """Record the outcome of one acceptance criterion: criterion(n, ok, detail)."""

    def record(number, ok, detail):
        CRITERIA[number] = (bool(ok), detail)
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
