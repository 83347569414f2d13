"""
Channel generation: geometry, path loss, steering vectors and seeded Rician blocks
"""

import math

import numpy as np
import pytest

from conftest import make_channels, make_geometry
from simulator.modules.ChannelGenerator import (
    ChannelGeometryError,
    PathLossParams,
    RicianParams,
    ScenarioGeometry,
    db_to_linear,
    dbm_to_watts,
    generate_channels,
    path_gain,
    rician_matrix,
    ula_steering,
)
from simulator.modules.MyEnums import Link


def test_db_conversions():
    assert db_to_linear(0) == 1.0
    assert db_to_linear(-30) == pytest.approx(1e-3, rel=1e-12)
    assert dbm_to_watts(15) == pytest.approx(0.0316227766, rel=1e-9)


def test_path_gain():
    assert path_gain(-30, 1.0, 3.5) == pytest.approx(1e-3, rel=1e-12)
    assert path_gain(-30, 50.0, 2.2) == pytest.approx(1e-3 * 50.0 ** -2.2, rel=1e-12)
    assert path_gain(-30, 50.0, 2.2) == pytest.approx(1.838e-7, rel=1e-3)
    assert path_gain(0, 2.0, 2.0) == pytest.approx(0.25)
    with pytest.raises(ChannelGeometryError):
        path_gain(-30, 0.0, 2.0)


def test_ula_steering():
    np.testing.assert_allclose(ula_steering(4, 0.0), np.ones(4))
    np.testing.assert_allclose(ula_steering(2, math.pi), [1, -1], atol=1e-12)
    np.testing.assert_allclose(ula_steering(3, math.pi / 2), [1, 1j, -1], atol=1e-12)
    v = ula_steering(64, 0.7)
    assert np.max(np.abs(np.abs(v) - 1.0)) <= 1e-12
    with pytest.raises(ValueError):
        ula_steering(0, 0.0)


def test_geometry_positions_and_distances():
    geom = make_geometry()
    distances = geom.link_distances()
    assert distances[Link.TI] == pytest.approx(50.0)
    assert distances[Link.TB] == pytest.approx(math.hypot(48.0, 2.0))
    assert distances[Link.TE] == pytest.approx(math.hypot(42.0, 2.0))
    assert distances[Link.IB] == pytest.approx(math.hypot(2.0, 2.0))
    assert distances[Link.IE] == pytest.approx(math.hypot(8.0, 2.0))


@pytest.mark.parametrize("field,value", [
    ("n_irs", 0),
    ("m_bs", 0),
    ("m_eve", -1),
    ("d", -1.0),
    ("d_bi", 0.0),
    ("d_v", -2.0),
])
def test_geometry_rejects_invalid_fields(field, value):
    kwargs = dict(d_bi=50.0, d=48.0, d_tilde=42.0, d_v=2.0, m_bs=4, m_eve=4, n_irs=32)
    kwargs[field] = value
    with pytest.raises(ChannelGeometryError):
        ScenarioGeometry(**kwargs)


def test_bob_on_top_of_irs_rejected():
    with pytest.raises(ChannelGeometryError, match="IB"):
        ScenarioGeometry(d_bi=50.0, d=50.0, d_tilde=42.0, d_v=0.0, m_bs=4, m_eve=4, n_irs=32)


def test_parameter_ranges():
    with pytest.raises(ChannelGeometryError):
        PathLossParams(zeta_ti=7.0)
    with pytest.raises(ChannelGeometryError):
        PathLossParams(l0_db=math.inf)
    with pytest.raises(ChannelGeometryError):
        RicianParams(k_ib=-1.0)


def test_rician_no_los_term_at_k_zero():
    los_rx, los_tx = ula_steering(3, 0.4), ula_steering(2, -0.9)
    a = rician_matrix(3, 2, 0.0, 4.0, los_rx, los_tx, np.random.default_rng(7))
    rng = np.random.default_rng(7)
    g = (rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))) / math.sqrt(2.0)
    np.testing.assert_allclose(a, 2.0 * g, rtol=1e-12)


def test_rician_los_limit():
    los_rx, los_tx = ula_steering(8, 0.3), ula_steering(4, 1.1)
    gain = 2.5e-6
    a = rician_matrix(8, 4, 1e12, gain, los_rx, los_tx, np.random.default_rng(3))
    dyad = math.sqrt(gain) * np.outer(los_rx, los_tx.conj())
    assert np.linalg.norm(a - dyad) / np.linalg.norm(dyad) <= 1e-5


def test_rician_rejects_negative_k():
    with pytest.raises(ChannelGeometryError):
        rician_matrix(2, 2, -0.1, 1.0, np.ones(2), np.ones(2), np.random.default_rng(0))


def test_rician_mean_power():
    rng = np.random.default_rng(11)
    los_rx, los_tx = ula_steering(2, 0.5), ula_steering(2, -0.2)
    total = sum(np.linalg.norm(rician_matrix(2, 2, 10.0, 1.0, los_rx, los_tx, rng)) ** 2 for _ in range(10000))
    assert total / 10000 == pytest.approx(4.0, rel=0.03)


def test_generate_channels_shapes():
    ch = make_channels(0)
    assert ch.h_ti.shape == (32, 4)
    assert ch.h_tb.shape == (4,)
    assert ch.h_te.shape == (4, 4)
    assert ch.h_ib.shape == (32,)
    assert ch.h_ie.shape == (32, 4)
    assert (ch.n_irs, ch.m_bs, ch.m_eve) == (32, 4, 4)


def test_generate_channels_deterministic():
    zero_k = RicianParams(k_ti=0, k_tb=0, k_te=0, k_ib=0, k_ie=0)
    a = make_channels(42, rician=zero_k)
    b = make_channels(42, rician=zero_k)
    for name in ("h_ti", "h_tb", "h_te", "h_ib", "h_ie"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    c = make_channels(43, rician=zero_k)
    assert not np.array_equal(a.h_ti, c.h_ti)


def test_eve_antennas_do_not_perturb_bob_channels():
    a = make_channels(5, m_eve=2)
    b = make_channels(5, m_eve=6)
    assert np.array_equal(a.h_ti, b.h_ti)
    assert np.array_equal(a.h_tb, b.h_tb)
    assert np.array_equal(a.h_ib, b.h_ib)


def test_reference_gain_scales_magnitudes():
    geom = make_geometry(n_irs=8)
    ric = RicianParams()
    base = PathLossParams(l0_db=-30)
    louder = PathLossParams(l0_db=-20)
    for seed in range(5):
        a = generate_channels(geom, base, ric, seed)
        b = generate_channels(geom, louder, ric, seed)
        # Same draws, only the large-scale factor differs
        np.testing.assert_allclose(b.h_ti, math.sqrt(10) * a.h_ti, rtol=1e-12)
        np.testing.assert_allclose(b.h_ie, math.sqrt(10) * a.h_ie, rtol=1e-12)


def test_without_reflection_zeroes_irs_links():
    ch = make_channels(1).without_reflection()
    assert not np.any(ch.h_ti) and not np.any(ch.h_ib) and not np.any(ch.h_ie)
    assert np.any(ch.h_tb) and np.any(ch.h_te)
