import pytest

ACCEPTANCE: dict[str, str] = {}
EXPECTED = ("1", "2", "3", "4", "5", "6", "7", "8", "9a", "9b", "10")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in EXPECTED:
        line = ACCEPTANCE.get(k, f"criterion {k:>3}: NOT RUN (deselected)")
        terminalreporter.write_line(line)


@pytest.fixture
def criterion(capsys):
    """Record one PASS/FAIL line for an acceptance criterion and echo it immediately."""

    def record(key, ok: bool, detail: str) -> bool:
        key = str(key)
        line = f"criterion {key:>3}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE[key] = line
        with capsys.disabled():
            print(f"\n{line}", flush=True)
        return ok

    return record
