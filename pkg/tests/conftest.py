import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from worksplit.model import SystemParams, UnitParams


@pytest.fixture
def two_unit_system() -> SystemParams:
    """The hypothetical two-unit system used throughout: (30, 2) and (20, 6)."""
    return SystemParams(UnitParams(30.0, 2.0), UnitParams(20.0, 6.0))
