"""Shared fixtures: the Monte Carlo validation grid and acceptance bookkeeping.

The grid fixture samples every (kernel, sequence) cell once per session;
the maximal-inequality acceptance tests all read from it. Acceptance
results are collected and echoed as one line per criterion at the end of
the run.
"""

import time

import numpy as np
import pytest

from depseries import montecarlo as mc
from depseries.criteria import one_sided
from depseries.kernels import make_kernel

GRID_N = 256
GRID_REPLICATES = 10_000

GRID_KERNELS = {
    "identity": "identity",
    "all_ones": "all_ones",
    "power_decay": "power_decay:K=1,a=1",
}


def _grid_sequences(n):
    k = np.arange(1, n + 1, dtype=np.float64)
    return {
        "inv_n": 1.0 / k,
        "inv_n_sq": 1.0 / k**2,
        "geometric": 2.0**-k,
    }


@pytest.fixture(scope="session")
def mc_grid():
    """All nine (kernel, sequence) cells at N=256, 10^4 replicates each."""
    cells = {}
    started = time.perf_counter()
    seqs = _grid_sequences(GRID_N)
    for i, (kname, kdesc) in enumerate(sorted(GRID_KERNELS.items())):
        kernel = make_kernel(kdesc)
        for j, (sname, vals) in enumerate(sorted(seqs.items())):
            config = mc.SimulationConfig(
                n=GRID_N, replicates=GRID_REPLICATES,
                seed=20240801 + 17 * (3 * i + j), chunk=GRID_REPLICATES,
            )
            cells[(kname, sname)] = mc.run_simulation(
                one_sided(vals), kernel, config
            )
    cells["_elapsed"] = time.perf_counter() - started
    return cells


def grid_cells(grid):
    return {k: v for k, v in grid.items() if isinstance(k, tuple)}


def bound_by_name(result, name):
    for b in result.bound_reports:
        if b.bound_name == name:
            return b
    raise KeyError(name)


_ACCEPTANCE = []


@pytest.fixture(scope="session")
def announce():
    """Record one pass/fail line per acceptance criterion for the summary."""

    def _announce(num: int, label: str, ok) -> bool:
        ok = bool(ok)
        _ACCEPTANCE.append((num, label, ok))
        return ok

    return _announce


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, label, ok in sorted(_ACCEPTANCE):
        tag = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{tag}] criterion {num:2d}: {label}")
