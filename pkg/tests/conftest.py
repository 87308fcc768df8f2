import os

import pytest

from fracbec.ground_state import CACHE_ENV, load_or_solve, solve_Q
from fracbec.spectral import Grid1D


@pytest.fixture(scope="session", autouse=True)
def _cache_dir(tmp_path_factory):
    """Point the ground-state cache at a per-session directory unless one is set."""
    old = os.environ.get(CACHE_ENV)
    if not old:
        os.environ[CACHE_ENV] = str(tmp_path_factory.mktemp("qcache"))
    yield
    if not old:
        os.environ.pop(CACHE_ENV, None)


@pytest.fixture(scope="session")
def gs():
    """Reference soliton on the default grid."""
    return load_or_solve()


@pytest.fixture(scope="session")
def gs_fast():
    return solve_Q(Grid1D(1024, 64.0))


@pytest.fixture(scope="session")
def a_star(gs):
    return gs.a_star


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
