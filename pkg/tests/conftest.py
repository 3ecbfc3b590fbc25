import numpy as np
import pytest

from bordered_yamabe import kernel, surface


@pytest.fixture(params=kernel.available_backends())
def backend(request):
    previous = kernel.set_backend(request.param)
    yield request.param
    kernel.set_backend(previous)


@pytest.fixture
def pants():
    return surface.pair_of_pants()


@pytest.fixture
def tetra():
    return surface.tetrahedral_surface()


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


def central_fd(f, x, h=1e-6):
    """Central-difference Jacobian of a vector function ``f`` at ``x``."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * h))
    return np.column_stack(cols)


_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    number, title = marker.args
    status = "PASS" if rep.passed else "FAIL"
    _ACCEPTANCE[number] = f"criterion {number} {status} {title} ({rep.duration:.3f} s)"


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])
