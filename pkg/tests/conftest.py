"""Session fixtures running the desk-scale experiment presets once.

The acceptance tests share three preset runs.  Stated runtime budgets assume
8 workers; this suite runs them serially and scales each budget by 8, so the
fixtures record their wall time for the tests to check.
"""

import time

import pytest

from mrpsim.experiment import PRESETS, run_grid


class PresetRun:
    def __init__(self, rows, elapsed):
        self.rows = rows
        self.elapsed = elapsed


def _run_preset(name: str) -> PresetRun:
    start = time.perf_counter()
    rows = run_grid(PRESETS[name], base_seed=42, workers=1)
    return PresetRun(rows, time.perf_counter() - start)


@pytest.fixture(scope="session")
def desk_run():
    """Netting-mode comparison grid: 3 noise levels, both modes, 2160 cells."""
    return _run_preset("desk")


@pytest.fixture(scope="session")
def null_anchor_run():
    """Deterministic-demand anchor grid: alpha 0, standard mode, 360 cells."""
    return _run_preset("null-anchor")


@pytest.fixture(scope="session")
def bias_run():
    """Permanent over/underbooking grid, extended mode, 720 cells."""
    return _run_preset("bias")
