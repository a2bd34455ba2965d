"""
Shared fixtures for the solver tests.
"""

import math

import numpy as np
import pytest

from app.models import BoxDomain, ParticleCloud, ScalarField
from app.services.medium import grid_partition


@pytest.fixture
def unit_box():
    return BoxDomain()


@pytest.fixture
def coarse_grid(unit_box):
    return grid_partition(unit_box, 4)


@pytest.fixture
def bump():
    return ScalarField.gaussian(center=(0.5, 0.5, 0.5), width=0.25, amplitude=1.0)


@pytest.fixture
def two_particles(unit_box):
    """Two particles 0.4 apart on the x axis, h = 0.5, c = 4 pi."""
    return ParticleCloud(
        domain=unit_box,
        a=0.04,
        kappa=0.5,
        centers=np.array([[0.3, 0.5, 0.5], [0.7, 0.5, 0.5]]),
        h_values=np.array([0.5, 0.5]),
        c_values=np.full(2, 4.0 * math.pi),
        min_separation=0.1,
    )


@pytest.fixture
def write_config(tmp_path):
    def _write(text: str, name: str = "config.json"):
        path = tmp_path / name
        path.write_text(text)
        return path

    return _write
