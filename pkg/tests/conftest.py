import pytest

from jamsec.config import SystemConfig


@pytest.fixture
def cfg():
    return SystemConfig()


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance as acc
    except ImportError:
        return
    if not acc.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(acc.RESULTS):
        ok, detail = acc.RESULTS[n]
        terminalreporter.write_line(acc.format_line(n, ok, detail))
