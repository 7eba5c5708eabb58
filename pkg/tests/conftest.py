import warnings

import numpy as np
import pytest

from mch_ist import grids, pipeline


def gaussian(amp, x):
    return amp * np.exp(-x * x)


@pytest.fixture(scope="session")
def x_nodes():
    return np.linspace(-12.0, 12.0, 2401)


@pytest.fixture(scope="session")
def gauss_run(x_nodes):
    """A = 0.1 Gaussian at kappa = 1 on the reference spectral grid."""
    return pipeline.run_forward(gaussian(0.1, x_nodes), x_nodes, grids.SpectralGrid(24.0, 1024), kappa=1.0)


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion, from the `criterion` property each test records."""
    lines = []
    for key in ("passed", "failed", "xfailed", "xpassed"):
        for rep in terminalreporter.stats.get(key, []):
            if getattr(rep, "when", "call") != "call":
                continue
            for name, value in getattr(rep, "user_properties", []):
                if name == "criterion":
                    verdict = {"passed": "PASS", "failed": "FAIL", "xfailed": "XFAIL (expected)",
                               "xpassed": "XPASS"}[key]
                    lines.append((value, verdict))
    if lines:
        terminalreporter.section("acceptance criteria")
        for value, verdict in sorted(lines):
            terminalreporter.write_line(f"{verdict:17s} criterion {value}")
