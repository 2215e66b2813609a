import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vpcontrol.core import make_grid


@pytest.fixture
def small_grid():
    """Cheap grid for solver unit tests: dx = 1, dv = 1."""
    return make_grid(16, 16, 16.0, 8.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
