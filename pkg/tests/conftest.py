import math

import pytest

from chainstirap import ChainSpec, ProtocolSpec


def pi_units(t_units, j0):
    """Convert a duration in units of pi/J0 to 1/J."""
    return t_units * math.pi / j0


@pytest.fixture
def headline_chain():
    return ChainSpec(39, 1.0)


@pytest.fixture
def headline_spec(headline_chain):
    return ProtocolSpec.from_distance(headline_chain, 5, 0.1, pi_units(19, 0.1))


@pytest.fixture
def small_spec():
    """Short protocol on a short chain, cheap enough for oracle comparisons."""
    return ProtocolSpec.from_distance(ChainSpec(11, 1.0), 5, 0.2, 60.0)
