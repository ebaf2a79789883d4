"""Pytest configuration and fixtures."""

import json
import math

import numpy as np
import pytest

from heisenflow.cli.presets import figure_eight, rotational_field, segment
from heisenflow.models.charge import DiscreteCharge
from heisenflow.models.point import HPoint
from heisenflow.services.flow_service import FlowConfig, integrate
from heisenflow.utils.config import RunConfig


# Coarse knobs keep end-to-end runs in the seconds range
COARSE = {
    "n": 1,
    "l": 1.0,
    "epsilon": 0.2,
    "grid": 0.1,
    "dt": 0.05,
    "local_nodes": 4,
    "pairing_tolerance": 0.25,
    "variation_tolerance": 0.25,
    "support_tolerance": 0.05,
    "slow_fraction_tolerance": 1.0,
}


@pytest.fixture
def rng():
    """Seeded random generator."""
    return np.random.default_rng(20240611)


@pytest.fixture
def random_points(rng):
    """A batch of points of the first Heisenberg group."""
    return rng.normal(size=(50, 3))


@pytest.fixture
def rotation():
    """The rotational field on the first Heisenberg group."""
    return rotational_field(1)


@pytest.fixture
def circle_curve(rotation):
    """Unit circle traversed once by the rotational flow."""
    config = FlowConfig(dt=2 * math.pi / 256, t_max=2 * math.pi)
    return integrate(HPoint([1.0, 0.0, 0.0]), rotation, config)


@pytest.fixture
def loop_charge():
    """Coarse figure-eight loop, a solenoidal charge."""
    return figure_eight(1, radius=0.5, spacing=0.04)


@pytest.fixture
def dipole():
    """Coarse segment charge with its divergence atoms."""
    return segment(1, length=1.0, spacing=0.1)


@pytest.fixture
def single_atom():
    """One atom at the origin pointing along X_1."""
    return DiscreteCharge(1, np.zeros((1, 3)), np.array([[1.0, 0.0]]))


@pytest.fixture
def coarse_config():
    """Run configuration for fast end-to-end tests."""
    return RunConfig.model_validate(COARSE)


@pytest.fixture
def workspace(tmp_path):
    """Directory with a coarse config and the bundled preset charges."""
    (tmp_path / "config.json").write_text(json.dumps(COARSE))
    (tmp_path / "loop.json").write_text(
        json.dumps({"n": 1, "preset": "figure_eight", "params": {"spacing": 0.04}})
    )
    (tmp_path / "annulus.json").write_text(
        json.dumps({"n": 1, "preset": "rotational_annulus", "params": {"spacing": 0.08}})
    )
    (tmp_path / "segment.json").write_text(
        json.dumps({"n": 1, "preset": "segment", "params": {"spacing": 0.1}})
    )
    (tmp_path / "empty.json").write_text(json.dumps({"n": 1, "atoms": []}))
    return tmp_path
