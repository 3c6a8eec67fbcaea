"""
Pytest configuration and shared fixtures for Carnot Hardy Verifier tests.
"""

import pytest
import tempfile
import shutil
from pathlib import Path
from unittest.mock import Mock

# Add project root to path for imports
import sys
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from config.settings import (
    QuadratureSettings,
    Settings,
    SharpnessSettings,
    ToleranceSettings,
)
from core.geometry import HalfSpace
from core.group_core import make_engel, make_euclidean, make_heisenberg, make_step2
from core.testfns import bump

SYNTHETIC_STEP2_A = [
    [[1, -1, 0], [1, 0, 0], [0, 0, 0]],
    [[0, 0, -1], [0, 0, 0], [1, 0, 0]],
]


@pytest.fixture
def temp_dir():
    """Create a temporary directory for tests."""
    temp_dir = tempfile.mkdtemp()
    yield Path(temp_dir)
    shutil.rmtree(temp_dir)


@pytest.fixture
def mock_settings(temp_dir):
    """Create mock settings for testing."""
    settings = Mock(spec=Settings)
    settings.app_name = "Carnot Hardy Verifier"
    settings.app_version = "0.1.0"
    settings.log_level = "INFO"
    settings.debug_mode = False
    settings.quadrature = QuadratureSettings()
    settings.tolerance = ToleranceSettings()
    settings.sharpness = SharpnessSettings()
    settings.report_output_path = str(temp_dir / "reports")
    settings.float_format = ".17g"
    settings.threads = 1
    settings.base_path = temp_dir
    return settings


@pytest.fixture
def heisenberg():
    return make_heisenberg()


@pytest.fixture
def engel():
    return make_engel()


@pytest.fixture
def engel_law():
    return make_engel("group-law")


@pytest.fixture
def euclidean2():
    return make_euclidean(2)


@pytest.fixture
def step2_group():
    """Synthetic step-two group with nonzero traces ``a[s][i][i]``."""
    return make_step2(3, 2, SYNTHETIC_STEP2_A, name="step2-synthetic")


@pytest.fixture
def upper_halfspace():
    """Heisenberg half-space ``{x_3 > 0}``."""
    return HalfSpace((0, 0, 1), 0)


@pytest.fixture
def horizontal_halfspace():
    """Heisenberg half-space with a first-stratum normal."""
    return HalfSpace((0.6, 0.8, 0), -0.5)


@pytest.fixture
def heisenberg_bump():
    """Bump supported in ``{x_3 > 0}``."""
    return bump((0.1, -0.2, 1.0), (0.5, 0.4, 0.5))


@pytest.fixture
def sample_run_config():
    """Small valid run config body."""
    return {
        "statement": "thm2.1",
        "group": "heisenberg",
        "domain": {"halfspace": {"nu": [0, 0, 1], "d": 0}},
        "beta": [-0.5, 0.5],
        "u": [
            {"kind": "bump", "center": [0.0, 0.0, 1.0], "widths": [0.5, 0.5, 0.5]},
            {"random": {"seed": 3, "count": 2, "box": [[-1.0, 1.0], [-1.0, 1.0], [0.2, 2.0]]}},
        ],
        "rule": {"kind": "gauss", "nodes": 12},
    }
