import numpy as np
import pytest

from haltonqmc.halton import HaltonSpec

#: Filled by the acceptance tests; printed once at the end of the run.
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=[(2,), (2, 3), (2, 3, 5)], ids=["s1", "s2", "s3"])
def spec(request):
    return HaltonSpec(request.param)


@pytest.fixture
def random_points(rng):
    def make(N, s):
        return rng.random((N, s))
    return make
