import numpy as np
import pytest

from hermlab import domains, gallery
from hermlab.expr import load_metric

# A torus metric with no symmetry at all: every torsion and curvature term is
# nonzero somewhere, so identities cannot pass by cancellation of zeros.
GENERIC_TOML = """
[metric]
name = "torus_generic"
domain = "torus"
h11 = "2 + 0.5*cos(pi*(z1+zb1)) + 0.3*sin(pi*i*(zb2-z2))"
h12 = "0.3*cos(pi*(z1+zb1+z2+zb2)) + 0.2*i*sin(pi*i*(zb1-z1))"
h21 = "0.3*cos(pi*(z1+zb1+z2+zb2)) - 0.2*i*sin(pi*i*(zb1-z1))"
h22 = "2 + 0.4*cos(pi*(z2+zb2) + pi*i*(zb1-z1))"
"""

P0 = domains.honest([1.0], [0.0])


@pytest.fixture(scope="session")
def flat():
    return gallery.gallery_metric("torus_flat")


@pytest.fixture(scope="session")
def conformal():
    return gallery.gallery_metric("torus_conformal", 0.1)


@pytest.fixture(scope="session")
def hopf():
    return gallery.gallery_metric("hopf_standard")


@pytest.fixture(scope="session")
def generic():
    return load_metric(GENERIC_TOML)


@pytest.fixture(scope="session")
def p0():
    return P0.copy()


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20261015)


CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[CRITERIA] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the summary prints them in order."""

    def record(number: int, ok: bool, detail: str) -> bool:
        request.config.stash[CRITERIA][number] = (bool(ok), detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(CRITERIA, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(lines):
        ok, detail = lines[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
