import pytest

_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line; call as ``criterion(num, title, ok, detail)``."""

    def record(num, title, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  [{num:>2}] {title}" + (f"  ({detail})" if detail else "")
        _ACCEPTANCE.append((num, line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)
