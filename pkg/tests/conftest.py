import sys

import numpy as np
import pytest

from semiscat.potential import make_potential


@pytest.fixture
def bump2():
    return make_potential([{"center": [0.0, 0.0], "radius": 1.0, "amplitude": 0.3}])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for name, mod in list(sys.modules.items()):
        if name.endswith("test_acceptance") and hasattr(mod, "RESULTS"):
            lines = [mod.RESULTS[k] for k in sorted(mod.RESULTS)]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
