from functools import lru_cache

import numpy as np
import pytest

from bergmanlab.mesh import generate
from bergmanlab.pipeline import build_systems


@lru_cache(maxsize=None)
def systems_for(domain: str, h: float):
    """Operator stack per (domain, h), shared across test modules."""
    return build_systems(generate(domain, h))


@pytest.fixture(scope="session")
def disk():
    return systems_for("disk", 0.2)


@pytest.fixture(scope="session")
def disk_fine():
    return systems_for("disk", 0.05)


@pytest.fixture(scope="session", params=[("disk", 0.2), ("square", 0.25), ("lshape", 0.25)],
                ids=lambda p: f"{p[0]}-{p[1]}")
def any_domain(request):
    return systems_for(*request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
