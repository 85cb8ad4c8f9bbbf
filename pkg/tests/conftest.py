import numpy as np
import pytest

from subcelldg.mesh import generate_square_mesh
from subcelldg.physics import BoundarySpec

_ACCEPTANCE: list[tuple[str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id): acceptance criterion identifier")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        detail = dict(item.user_properties).get("detail", "")
        if rep.passed and not hasattr(rep, "wasxfail"):
            status = "PASS"
        elif hasattr(rep, "wasxfail"):
            status = "FAIL (documented, xfail)"
        else:
            status = "FAIL"
        _ACCEPTANCE.append((marker.args[0], status, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    key = lambda row: int(row[0][1:])  # noqa: E731
    for cid, status, detail in sorted(_ACCEPTANCE, key=key):
        terminalreporter.write_line(f"{cid}: {status}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def square36():
    """Jittered 3x3x4 mesh (36 cells) with outflow boundaries."""
    return generate_square_mesh(3, jitter=0.3, seed=2)


@pytest.fixture(scope="session")
def outflow():
    return {"default": BoundarySpec.outflow()}
