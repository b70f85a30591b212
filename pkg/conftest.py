import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from noma import Scenario, UserSpec  # noqa: E402
from noma.config import load_preset  # noqa: E402


def pytest_collection_modifyitems(config, items):
    if os.getenv("NOMA_SLOW_TESTS") == "1":
        return
    skip = pytest.mark.skip(reason="set NOMA_SLOW_TESTS=1 to run Monte Carlo acceptance tests")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def qpsk_single():
    """N = 1, QPSK, L = 1, Eb = N0 = 1."""
    return Scenario(users=(UserSpec(mod_order=4),), antennas=1)


@pytest.fixture
def qpsk_pair():
    return Scenario(
        users=(UserSpec(mod_order=4), UserSpec(mod_order=4, channel_var=0.5)),
        antennas=2,
    )


@pytest.fixture
def scenario2():
    return load_preset("scenario-2")
