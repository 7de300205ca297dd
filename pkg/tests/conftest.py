from __future__ import annotations

import numpy as np
import pytest

from netsync.graph import build_from_edges
from netsync.integrate import IntegratorConfig, settle_to_limit_cycle
from netsync.models import FhnParams, SystemSpec

FIVE_NODE_EDGES = [(0, 1), (0, 3), (1, 2), (1, 4), (3, 4)]

_criteria: dict[int, list[tuple[str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    marker = getattr(report, "_criterion", None)
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria.setdefault(marker, []).append((report.nodeid, report.outcome))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep._criterion = m.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        results = _criteria[n]
        failed = [nid.split("::")[-1] for nid, out in results if out != "passed"]
        status = "PASS" if not failed else "FAIL"
        line = f"criterion {n}: {status} ({len(results) - len(failed)}/{len(results)} checks)"
        if failed:
            line += "  failing: " + ", ".join(failed)
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def five_node_graph():
    return build_from_edges(5, FIVE_NODE_EDGES, [f"X{k}" for k in range(1, 6)])


@pytest.fixture(scope="session")
def fhn_params():
    return FhnParams()


@pytest.fixture(scope="session")
def fhn_cycle(fhn_params):
    """Settled limit cycle of the isolated FitzHugh-Nagumo oscillator."""
    cfg = IntegratorConfig(dt=1e-3, t_end=300.0, transient=200.0)
    return settle_to_limit_cycle(SystemSpec("fhn_single", fhn_params), (0.0, 0.0), cfg)
