from __future__ import annotations

import pytest

from psi import Runtime
from psi.fixtures import seed

CLOCK = "2025-11-05T12:00:00+00:00"  # a Wednesday, noon UTC


@pytest.fixture
def runtime(tmp_path) -> Runtime:
    """Fresh runtime over an empty data directory, frozen clock."""
    return Runtime(tmp_path / "data", clock=CLOCK)


@pytest.fixture
def pilot_runtime(tmp_path) -> Runtime:
    """Runtime seeded with the full pilot-week fixture, frozen clock."""
    return seed(tmp_path / "data", "pilot_week")
