import numpy as np
import pytest

from specfreq import TimePanel, default_bandwidth  # noqa: F401 (re-exported fixture deps)
from specfreq.timeseries import default_labels


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def make_panel(rng, n, p, scale=1.0):
    return TimePanel(values=scale * rng.normal(size=(n, p)), labels=default_labels(p))


@pytest.fixture
def small_panel(rng):
    return make_panel(rng, 48, 3)
