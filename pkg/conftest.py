import math

import numpy as np
import pytest

from simulator.modules.ChannelGenerator import (
    PathLossParams,
    RicianParams,
    ScenarioGeometry,
    generate_channels,
)
from simulator.modules.SecrecyMetrics import NoisePowers, PhaseVector

P_MAX = 10 ** ((15 - 30) / 10)
NOISE = NoisePowers.from_dbm(-75, -75)


def make_geometry(n_irs=32, m_bs=4, m_eve=4, d=48.0, d_tilde=42.0):
    return ScenarioGeometry(d_bi=50.0, d=d, d_tilde=d_tilde, d_v=2.0, m_bs=m_bs, m_eve=m_eve, n_irs=n_irs)


def make_channels(seed, n_irs=32, m_bs=4, m_eve=4, rician=None, **geometry):
    return generate_channels(
        make_geometry(n_irs=n_irs, m_bs=m_bs, m_eve=m_eve, **geometry),
        PathLossParams(),
        rician or RicianParams(),
        seed,
    )


def random_theta(rng, n):
    return PhaseVector.from_shifts(rng.uniform(0.0, 2.0 * math.pi, n))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
