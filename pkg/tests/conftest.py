import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ulcov.pathloss import (
    LosProfile,
    PowerControl,
    three_gpp_path_loss,
)

# Per-resource-block thermal noise with the 5 dB receiver noise figure;
# pairs with the per-block baseline transmit power of -76 dBm.
NOISE_DBM = -116.4
NOISE_MW = 10.0 ** (NOISE_DBM / 10.0)
P0_MW = 10.0**-7.6


@pytest.fixture(scope="session")
def model():
    return three_gpp_path_loss()


@pytest.fixture(scope="session")
def linear():
    return LosProfile.linear(0.3)


@pytest.fixture(scope="session")
def single_slope():
    return LosProfile.single_slope()


@pytest.fixture(scope="session")
def exponential():
    return LosProfile.exponential()


@pytest.fixture(scope="session")
def pc():
    return PowerControl(p0_mw=P0_MW, epsilon=0.7)


@pytest.fixture(scope="session")
def noise():
    return NOISE_MW
