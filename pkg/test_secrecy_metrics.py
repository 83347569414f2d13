"""
Rates, effective channels, X_B / X_E and the alpha parameterization
"""

import math

import numpy as np
import pytest

from conftest import NOISE, P_MAX, make_channels, random_theta
from simulator.modules.Beamforming import optimal_beamformer
from simulator.modules.ChannelGenerator import ChannelSet
from simulator.modules.SecrecyMetrics import (
    Beamformer,
    NoisePowers,
    PhaseVector,
    build_alphas,
    build_xb,
    build_xe,
    effective_bob,
    effective_eve,
    objective_f,
    phi_from_theta,
    rate_bob,
    rate_eve_det,
    rate_eve_sum,
    received_amplitudes,
    secrecy_rate,
)


def scalar_channels(h_ti, h_tb, h_te, h_ib, h_ie):
    return ChannelSet(
        h_ti=np.array([[h_ti]], dtype=complex),
        h_tb=np.array([h_tb], dtype=complex),
        h_te=np.array([[h_te]], dtype=complex),
        h_ib=np.array([h_ib], dtype=complex),
        h_ie=np.array([[h_ie]], dtype=complex),
    )


def random_beamformer(rng, m, p_max=P_MAX):
    w = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return Beamformer(w=math.sqrt(p_max) * w / np.linalg.norm(w), p_max=p_max)


def test_phase_vector_validation():
    with pytest.raises(ValueError):
        PhaseVector(np.array([1.0, 0.5]))
    with pytest.raises(ValueError):
        PhaseVector(np.array([], dtype=complex))
    theta = PhaseVector.from_shifts(np.array([0.0, math.pi / 2]))
    np.testing.assert_allclose(theta.theta, [1, -1j], atol=1e-15)
    np.testing.assert_allclose(theta.shifts, [0.0, math.pi / 2], atol=1e-12)


def test_beamformer_power_budget():
    Beamformer(w=np.array([1.0, 0.0]), p_max=1.0)
    Beamformer(w=np.array([1.0 + 1e-12, 0.0]), p_max=1.0)
    with pytest.raises(ValueError):
        Beamformer(w=np.array([1.0, 0.1]), p_max=1.0)
    with pytest.raises(ValueError):
        Beamformer(w=np.array([math.nan]), p_max=1.0)


def test_noise_floor():
    with pytest.raises(ValueError):
        NoisePowers(1e-31, 1e-10)
    noise = NoisePowers.from_dbm(-75, -75)
    assert noise.sigma2_b == pytest.approx(10 ** -10.5)


def test_phi_from_theta():
    np.testing.assert_allclose(phi_from_theta(PhaseVector.ones(3)), np.eye(3))
    np.testing.assert_allclose(phi_from_theta(PhaseVector(np.array([-1j]))), [[1j]])


def test_effective_channels_direct_only():
    ch = make_channels(3).without_reflection()
    theta = PhaseVector.ones(ch.n_irs)
    np.testing.assert_allclose(effective_bob(ch, theta), ch.h_tb)
    np.testing.assert_allclose(effective_eve(ch, theta), ch.h_te)


def test_effective_bob_scalar_hand_calculation():
    ch = scalar_channels(h_ti=2 + 1j, h_tb=0.5j, h_te=1.0, h_ib=1 - 1j, h_ie=0.0)
    theta = PhaseVector.ones(1)
    # h_B^H = h_IB^* H_TI + h_TB^*
    expected_row = np.conj(1 - 1j) * (2 + 1j) + np.conj(0.5j)
    np.testing.assert_allclose(effective_bob(ch, theta), [np.conj(expected_row)])


def test_effective_eve_single_antenna_matches_bob_formula(rng):
    ch = make_channels(9, m_eve=1)
    theta = random_theta(rng, ch.n_irs)
    as_bob = ChannelSet(h_ti=ch.h_ti, h_tb=ch.h_te[:, 0], h_te=ch.h_te, h_ib=ch.h_ie[:, 0], h_ie=ch.h_ie)
    np.testing.assert_allclose(effective_eve(ch, theta)[:, 0], effective_bob(as_bob, theta), rtol=1e-12)


def test_dimension_mismatch_rejected():
    ch = make_channels(0, n_irs=8)
    with pytest.raises(ValueError):
        effective_bob(ch, PhaseVector.ones(4))


def test_alpha_identities(rng):
    for seed in range(100):
        ch = make_channels(seed, n_irs=16)
        theta = random_theta(rng, ch.n_irs)
        w = random_beamformer(rng, ch.m_bs)
        bob, eve = received_amplitudes(build_alphas(ch, w), theta)

        direct_bob = np.vdot(effective_bob(ch, theta), w.w)
        assert abs(bob - direct_bob) <= 1e-10 * abs(direct_bob)
        direct_eve = effective_eve(ch, theta).conj().T @ w.w
        np.testing.assert_allclose(eve, direct_eve, rtol=1e-10)


def test_alphas_scalar_case():
    ch = scalar_channels(h_ti=1 + 2j, h_tb=3.0, h_te=1j, h_ib=2 - 1j, h_ie=0.5)
    w = Beamformer(w=np.array([0.1j]), p_max=1.0)
    alphas = build_alphas(ch, w)
    assert alphas.alpha_b[0] == pytest.approx(np.conj(2 - 1j) * (1 + 2j) * 0.1j)
    assert alphas.alpha_b_tilde == pytest.approx(3.0 * 0.1j)
    assert alphas.alpha_e[0, 0] == pytest.approx(0.5 * (1 + 2j) * 0.1j)
    assert alphas.alpha_e_tilde[0] == pytest.approx(np.conj(1j) * 0.1j)


def test_zero_beamformer():
    ch = make_channels(2, n_irs=8)
    theta = PhaseVector.ones(ch.n_irs)
    w = Beamformer(w=np.zeros(ch.m_bs), p_max=P_MAX)
    assert rate_bob(ch, theta, w, NOISE) == 0.0
    assert rate_eve_sum(ch, theta, w, NOISE) == 0.0
    assert rate_eve_det(ch, theta, w, NOISE) == pytest.approx(0.0, abs=1e-15)
    alphas = build_alphas(ch, w)
    assert not np.any(alphas.alpha_b) and alphas.alpha_b_tilde == 0
    assert objective_f(alphas, theta, NOISE) == pytest.approx(NOISE.sigma2_b / NOISE.sigma2_e)


def test_rate_bob_one_bit():
    ch = scalar_channels(h_ti=0.0, h_tb=1.0, h_te=0.0, h_ib=0.0, h_ie=0.0)
    noise = NoisePowers(1e-2, 1e-2)
    w = Beamformer(w=np.array([0.1]), p_max=1.0)
    assert rate_bob(ch, PhaseVector.ones(1), w, noise) == pytest.approx(1.0, abs=1e-12)


def test_rate_bob_matches_direct_formula(rng):
    ch = make_channels(17)
    theta = random_theta(rng, ch.n_irs)
    w = random_beamformer(rng, ch.m_bs)
    h_row = ch.h_ib.conj() @ np.diag(theta.theta.conj()) @ ch.h_ti + ch.h_tb.conj()
    expected = math.log2(1 + abs(h_row @ w.w) ** 2 / NOISE.sigma2_b)
    assert rate_bob(ch, theta, w, NOISE) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("m_eve", [1, 2, 3, 4])
def test_eve_rate_det_equals_sum(rng, m_eve):
    for seed in range(50):
        ch = make_channels(seed, n_irs=16, m_eve=m_eve)
        theta = random_theta(rng, ch.n_irs)
        w = random_beamformer(rng, ch.m_bs)
        assert abs(rate_eve_det(ch, theta, w, NOISE) - rate_eve_sum(ch, theta, w, NOISE)) <= 1e-9


def test_secrecy_rate_clamps_identical_channels(rng):
    ch = make_channels(4, m_eve=1)
    twin = ChannelSet(h_ti=ch.h_ti, h_tb=ch.h_tb, h_te=ch.h_tb[:, None], h_ib=ch.h_ib, h_ie=ch.h_ib[:, None])
    theta = random_theta(rng, ch.n_irs)
    w = random_beamformer(rng, ch.m_bs)
    assert secrecy_rate(twin, theta, w, NOISE) <= 1e-12


def test_secrecy_rate_without_eve(rng):
    ch = make_channels(6)
    no_eve = ChannelSet(h_ti=ch.h_ti, h_tb=ch.h_tb, h_te=np.zeros_like(ch.h_te), h_ib=ch.h_ib, h_ie=np.zeros_like(ch.h_ie))
    theta = random_theta(rng, ch.n_irs)
    w = random_beamformer(rng, ch.m_bs)
    assert secrecy_rate(no_eve, theta, w, NOISE) == pytest.approx(rate_bob(no_eve, theta, w, NOISE))


def test_secrecy_rate_is_clamped_difference(rng):
    for seed in range(20):
        ch = make_channels(seed)
        theta = random_theta(rng, ch.n_irs)
        w = random_beamformer(rng, ch.m_bs)
        diff = rate_bob(ch, theta, w, NOISE) - rate_eve_sum(ch, theta, w, NOISE)
        assert secrecy_rate(ch, theta, w, NOISE) == max(0.0, diff)


def test_quadratic_matrices(rng):
    ch = make_channels(8)
    theta = random_theta(rng, ch.n_irs)
    xb, xe = build_xb(ch, theta, NOISE), build_xe(ch, theta, NOISE)
    h_b = effective_bob(ch, theta)
    assert np.trace(xb).real == pytest.approx(np.linalg.norm(h_b) ** 2 / NOISE.sigma2_b, rel=1e-12)
    assert np.linalg.matrix_rank(xb, tol=1e-9 * np.abs(xb).max()) == 1
    assert np.linalg.eigvalsh(xe).min() >= -1e-12 * np.abs(xe).max()

    w = random_beamformer(rng, ch.m_bs)
    quad = np.vdot(w.w, xb @ w.w).real
    assert math.log2(1 + quad) == pytest.approx(rate_bob(ch, theta, w, NOISE), abs=1e-12)


def test_objective_matches_rate_difference(rng):
    noise = NoisePowers.from_dbm(-75, -70)
    for seed in range(10):
        ch = make_channels(seed)
        theta = random_theta(rng, ch.n_irs)
        w = random_beamformer(rng, ch.m_bs)
        f = objective_f(build_alphas(ch, w), theta, noise)
        diff = rate_bob(ch, theta, w, noise) - rate_eve_sum(ch, theta, w, noise)
        assert diff == pytest.approx(math.log2(f) + math.log2(noise.sigma2_e / noise.sigma2_b), abs=1e-10)


def test_objective_orders_phases_like_secrecy_rate(rng):
    ch = make_channels(12, n_irs=8)
    w = optimal_beamformer(build_xb(ch, PhaseVector.ones(8), NOISE), build_xe(ch, PhaseVector.ones(8), NOISE), P_MAX)
    alphas = build_alphas(ch, w)
    samples = [random_theta(rng, 8) for _ in range(50)]
    by_f = sorted(range(50), key=lambda i: objective_f(alphas, samples[i], NOISE))
    rates = [secrecy_rate(ch, samples[i], w, NOISE) for i in by_f]
    # Nondecreasing up to the clamp at zero
    assert all(b >= a - 1e-12 for a, b in zip(rates, rates[1:]))
