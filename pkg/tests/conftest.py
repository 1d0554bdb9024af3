import pytest

from sudlerlab.birkhoff import SummandKind, prefix_stream


@pytest.fixture(scope="session")
def golden_log_p():
    """log P_N(phi) for N <= 10^6, shared across modules."""
    return prefix_stream(SummandKind.log_sudler(), "golden", 10**6)


@pytest.fixture(scope="session")
def golden_log_dioph():
    return prefix_stream(SummandKind.log_diophantine(), "golden", 10**6)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
