"""
Alternating optimization driver
"""

import math

import numpy as np
import pytest

from conftest import NOISE, P_MAX, make_channels, random_theta
from simulator.modules.AoDriver import (
    AoOptions,
    has_converged,
    init_state,
    maximize_secrecy,
    w_step,
)
from simulator.modules.CcmManifold import CgOptions
from simulator.modules.ChannelGenerator import ChannelSet
from simulator.modules.FpPhaseOptimizer import FpOptions, optimize_phases
from simulator.modules.MyEnums import AoInit
from simulator.modules.SecrecyMetrics import Beamformer, rate_bob, secrecy_rate


def test_options():
    assert AoOptions(init="irs_row").init is AoInit.IRS_ROW
    with pytest.raises(ValueError):
        AoOptions(eps_sr=0.0)
    with pytest.raises(ValueError):
        AoOptions(max_ao=0)
    with pytest.raises(ValueError):
        AoOptions(init="bogus")


@pytest.mark.parametrize("init", list(AoInit))
def test_init_state(init):
    ch = make_channels(0)
    w, theta = init_state(ch, P_MAX, init)
    np.testing.assert_array_equal(theta.theta, np.ones(ch.n_irs))
    assert w.power == pytest.approx(P_MAX, rel=1e-12)
    again, _ = init_state(ch, P_MAX, init)
    np.testing.assert_array_equal(w.w, again.w)


def test_direct_mrt_init_points_at_bob():
    ch = make_channels(2)
    w, _ = init_state(ch, P_MAX, AoInit.DIRECT_MRT)
    assert abs(np.vdot(ch.h_tb, w.w)) == pytest.approx(np.linalg.norm(ch.h_tb) * math.sqrt(P_MAX), rel=1e-12)


def test_has_converged():
    assert has_converged(1.0, 1.0005, 1e-3)
    assert not has_converged(1.0, 1.1, 1e-3)
    assert has_converged(0.0, 0.0, 1e-3)
    assert not has_converged(0.5, 0.0, 1e-3)


def test_w_step_beats_perturbed_beamformers(rng):
    for seed in range(10):
        ch = make_channels(seed, n_irs=16)
        theta = random_theta(rng, ch.n_irs)
        w = w_step(ch, theta, P_MAX, NOISE)
        best = secrecy_rate(ch, theta, w, NOISE)
        for _ in range(100):
            v = w.w + 0.3 * np.linalg.norm(w.w) * (rng.standard_normal(ch.m_bs) + 1j * rng.standard_normal(ch.m_bs))
            v *= math.sqrt(P_MAX) / np.linalg.norm(v)
            assert secrecy_rate(ch, theta, Beamformer(v, P_MAX), NOISE) <= best + 1e-9


def test_secrecy_trace_is_monotone():
    for seed in range(10):
        result = maximize_secrecy(make_channels(seed, n_irs=16), P_MAX, NOISE, AoOptions())
        assert len(result.sr_trace) == result.iterations + 1
        assert np.all(np.diff(result.sr_trace) >= -1e-9)
        assert result.secrecy_rate == result.sr_trace[-1]
        assert len(result.fp_iterations) == result.iterations


def test_result_rates_are_consistent():
    ch = make_channels(5, n_irs=16)
    result = maximize_secrecy(ch, P_MAX, NOISE, AoOptions())
    assert result.secrecy_rate == pytest.approx(max(0.0, result.rate_bob - result.rate_eve), abs=1e-12)
    assert result.w_star.power == pytest.approx(P_MAX, rel=1e-12)
    assert np.max(np.abs(np.abs(result.theta_star.theta) - 1.0)) <= 1e-12


def test_without_eve_secrecy_equals_bob_rate():
    base = make_channels(7, n_irs=16)
    ch = ChannelSet(h_ti=base.h_ti, h_tb=base.h_tb, h_te=np.zeros_like(base.h_te), h_ib=base.h_ib, h_ie=np.zeros_like(base.h_ie))
    result = maximize_secrecy(ch, P_MAX, NOISE, AoOptions())
    assert result.rate_eve == 0.0
    assert result.secrecy_rate == pytest.approx(rate_bob(ch, result.theta_star, result.w_star, NOISE), abs=1e-12)


def test_identical_channels_give_zero():
    base = make_channels(4, n_irs=8, m_eve=1)
    twin = ChannelSet(h_ti=base.h_ti, h_tb=base.h_tb, h_te=base.h_tb[:, None], h_ib=base.h_ib, h_ie=base.h_ib[:, None])
    result = maximize_secrecy(twin, P_MAX, NOISE, AoOptions())
    assert result.secrecy_rate <= 1e-12
    assert result.iterations == 1


@pytest.mark.parametrize("init", list(AoInit))
def test_every_init_improves_on_its_start(init):
    ch = make_channels(9, n_irs=16)
    result = maximize_secrecy(ch, P_MAX, NOISE, AoOptions(init=init))
    assert result.secrecy_rate >= result.sr_trace[0] - 1e-9


@pytest.mark.slow
def test_most_runs_converge_within_five_iterations():
    # M = M' = 4, N = 32, d = 48, d_tilde = 42, no LoS on the direct links
    fast = 0
    for seed in range(100):
        result = maximize_secrecy(make_channels(1000 + seed), P_MAX, NOISE, AoOptions())
        assert np.all(np.diff(result.sr_trace) >= -1e-9)
        fast += result.iterations <= 5
    assert fast >= 90


def test_default_tolerances_reach_a_tight_run():
    ch = make_channels(0)
    tight = AoOptions(
        eps_sr=1e-6,
        max_ao=30,
        fp=FpOptions(eps_outer=1e-8, max_outer=100, cg=CgOptions(eps_grad=1e-8)),
    )
    reference = maximize_secrecy(ch, P_MAX, NOISE, tight)
    result = maximize_secrecy(ch, P_MAX, NOISE, AoOptions())
    assert result.cg_iterations > 0
    assert result.secrecy_rate >= 0.9 * reference.secrecy_rate


def test_converged_point_is_jointly_stationary():
    opts = AoOptions()
    checked = 0
    for seed in range(6):
        ch = make_channels(200 + seed, n_irs=16)
        result = maximize_secrecy(ch, P_MAX, NOISE, opts)
        if result.iterations >= opts.max_ao:
            continue
        checked += 1
        sr = result.secrecy_rate
        w = w_step(ch, result.theta_star, P_MAX, NOISE)
        assert secrecy_rate(ch, result.theta_star, w, NOISE) - sr <= opts.eps_sr * sr + 1e-12
        fp = optimize_phases(ch, result.w_star, NOISE, result.theta_star, opts.fp)
        assert secrecy_rate(ch, fp.theta, result.w_star, NOISE) - sr <= opts.eps_sr * sr + 1e-12
    assert checked >= 3


def test_iteration_limit_respected():
    result = maximize_secrecy(make_channels(3, n_irs=16), P_MAX, NOISE, AoOptions(eps_sr=1e-15, max_ao=2))
    assert result.iterations <= 2
    assert len(result.sr_trace) == result.iterations + 1


def test_converged_run_stops_within_tolerance():
    opts = AoOptions()
    result = maximize_secrecy(make_channels(11, n_irs=16), P_MAX, NOISE, opts)
    if result.iterations < opts.max_ao:
        last, prev = result.sr_trace[-1], result.sr_trace[-2]
        assert abs(last - prev) <= opts.eps_sr * abs(last) or last < 1e-12
