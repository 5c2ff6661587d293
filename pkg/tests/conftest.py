import pytest

from gapmatch._backend import available_kernels

KERNELS = available_kernels()


@pytest.fixture(params=sorted(KERNELS))
def kernel(request):
    return KERNELS[request.param]


ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.fixture
def acceptance_log(request):
    """Append ``(line)`` strings; they are echoed in the terminal summary."""
    return request.config.stash[ACCEPTANCE]


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
