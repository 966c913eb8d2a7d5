import os
from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).resolve().parents[1] / "data"

try:
    import cvxpy as cp
    HAVE_CVXPY = "CLARABEL" in cp.installed_solvers()
except ImportError:           # pragma: no cover
    cp = None
    HAVE_CVXPY = False

needs_cvxpy = pytest.mark.skipif(not HAVE_CVXPY, reason="cvxpy with Clarabel not installed")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def data_dir():
    return DATA


_T0 = {}


def pytest_sessionstart(session):
    import time
    _T0["t"] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    import sys
    import time
    mod = next((m for name, m in sys.modules.items()
                if name.endswith("test_acceptance") and hasattr(m, "summary_lines")), None)
    if mod is None or not mod.RESULTS:
        return
    dt = time.perf_counter() - _T0.get("t", time.perf_counter())
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
    # the runtime limit applies to whole-suite runs, not to single files
    full = all(os.path.isdir(a) for a in terminalreporter.config.args)
    verdict = ("PASS" if dt < 300 else "FAIL") if full else "n/a (partial run)"
    terminalreporter.write_line(f"criterion 8 suite runtime {verdict}: {dt:.1f}s (limit 300s)")
