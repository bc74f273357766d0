import pytest

from crlohner import kernels

ACCEPTANCE_LINES = {}


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    """Run a test once per kernel backend."""
    prev = kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend(prev)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
