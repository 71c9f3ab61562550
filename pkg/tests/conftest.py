"""
Pytest configuration and fixtures for bathtub tests.
"""

import numpy as np
import pytest

from bathtub.config import get_settings
from bathtub.models.shape import ModelKind
from bathtub.models.stepfn import Interval, StepFunction
from bathtub.schemas.data import CensoredSample, Sample
from bathtub.schemas.risk import TruthSpec
from bathtub.services.simulation import default_truth
from bathtub.storage.local import LocalStorageBackend


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Drop cached settings so environment tweaks in a test take effect."""
    monkeypatch.delenv("BATHTUB_WORKERS", raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def unit() -> Interval:
    """The unit interval [0, 1]."""
    return Interval(0.0, 1.0)


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator."""
    return np.random.default_rng(20240611)


@pytest.fixture
def small_sample(unit) -> Sample:
    """Three observations on [0, 1]."""
    return Sample(values=[0.1, 0.2, 0.6], domain=unit)


@pytest.fixture
def valley_step(unit) -> StepFunction:
    """U-shaped step function with its valley on [0.4, 0.6)."""
    return StepFunction(unit, [0.2, 0.4, 0.6, 0.8], [3.0, 2.0, 0.5, 1.0, 4.0])


@pytest.fixture
def tied_records() -> CensoredSample:
    """Life data with a death and a censoring tied at t = 1."""
    return CensoredSample(times=[1.0, 1.0, 2.0, 3.0], delta=[1, 0, 1, 0], horizon=3.0)


@pytest.fixture
def density_truth() -> TruthSpec:
    """Preset 5-piece unimodal density on [0, 1]."""
    return default_truth(ModelKind.DENSITY)


@pytest.fixture
def nhpp_truth() -> TruthSpec:
    """Preset bathtub failure rate on [0, 100]."""
    return default_truth(ModelKind.NHPP)


@pytest.fixture
def test_storage(tmp_path) -> LocalStorageBackend:
    """Local storage backend rooted in a temporary directory."""
    return LocalStorageBackend(base_path=str(tmp_path / "storage"))
