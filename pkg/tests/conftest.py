import numpy as np
import pytest

from siac.channel import ChannelParams


@pytest.fixture
def params_c1() -> ChannelParams:
    """sigma^2 = 1 W, gamma_th = 1 (0 dB), so c = 1 W."""
    return ChannelParams(1.0, 1.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
