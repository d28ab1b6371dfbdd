import pytest
from hypothesis import settings

# property suites run a fixed, reproducible sequence of at least 1000 cases
settings.register_profile("volrates", max_examples=1000, deadline=None, derandomize=True,
                          print_blob=True)
settings.load_profile("volrates")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report_line():
    def record(label: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
