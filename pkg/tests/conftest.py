"""
Shared fixtures for the HyperHOM test suite
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from core.optics.source import SourceParams


@pytest.fixture
def ideal():
    """Unit visibilities, no walk-off"""
    return SourceParams.ideal()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def wide_grid():
    """Delay grid wide enough for the dip envelope to vanish at the ends"""
    return np.arange(-100, 101) * 2e-6
