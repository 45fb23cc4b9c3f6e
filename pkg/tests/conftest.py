from __future__ import annotations

import os

import numpy as np
import pytest

from distode import PiecewiseDist, TestFn
from distode.randfam import rng_for

SEED = int(os.environ.get("DISTODE_SEED", "20240607"))

# filled by tests/test_acceptance.py, printed once at the end of the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def rng():
    return rng_for(SEED)


@pytest.fixture
def g():
    """Asymmetric bump: its odd derivatives do not vanish at 0."""
    return TestFn.bump(0.25, 1.0)


def assert_delta_only_at(F: PiecewiseDist, x0: float) -> None:
    assert all(p.is_zero() for p in F.pieces)
    assert set(F.breakpoints) <= {x0}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, label = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {label}")
