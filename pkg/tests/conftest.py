# tests/conftest.py

import numpy as np
import pytest

from core.maps import FiberFamily, MapSequence, SkewSystem
from core.metric_core import MetricSpaceDescriptor


@pytest.fixture(autouse=True)
def silent_logging(monkeypatch):
    # main() installs a stderr handler; keep it quiet under capture.
    monkeypatch.setenv("NSCONTRACT_LOG", "silent")


@pytest.fixture
def real_line():
    return MetricSpaceDescriptor.real_line()


@pytest.fixture
def halving(real_line):
    return MapSequence.constant(real_line, lambda x: 0.5 * np.asarray(x, dtype=float), name="halving")


@pytest.fixture
def lambda_zero_system(real_line, halving):
    """f_n(x) = x/2 with h_n^x(y) = x + 1, which forgets y entirely."""
    fiber = FiberFamily(real_line, real_line, lambda n, x, y: np.asarray(x, dtype=float) + 1.0, name="forgetful")
    return SkewSystem(halving, fiber, x0=np.ones(1), y0=np.zeros(1), name="lambda-zero")
