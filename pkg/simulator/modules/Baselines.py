"""
Baselines: comparison schemes and the exhaustive phase-grid oracle.

Every scheme returns an AoResult so the experiment runner can aggregate
them the same way as the proposed AO scheme.
"""

from __future__ import annotations

import logging
import math
from typing import Tuple

import numpy as np

from .AoDriver import AoResult, w_step
from .Beamforming import mrt_beamformer
from .ChannelGenerator import ChannelSet
from .FpPhaseOptimizer import FpOptions, optimize_phases
from .SecrecyMetrics import (
    Beamformer,
    NoisePowers,
    PhaseVector,
    build_alphas,
    objective_f,
    rate_bob,
    rate_eve_sum,
    secrecy_rate,
)

logger = logging.getLogger(__name__)

ORACLE_BUDGET = 10 ** 8
ORACLE_CHUNK = 1 << 16


class OracleBudgetError(ValueError):
    """Phase grid too large to enumerate."""


def _record(ch: ChannelSet, w: Beamformer, theta: PhaseVector, noise: NoisePowers, trace, iterations: int, **extra) -> AoResult:
    return AoResult(
        w_star=w,
        theta_star=theta,
        secrecy_rate=trace[-1],
        sr_trace=list(trace),
        iterations=iterations,
        rate_bob=rate_bob(ch, theta, w, noise),
        rate_eve=rate_eve_sum(ch, theta, w, noise),
        **extra,
    )


def heuristic_mrt(ch: ChannelSet, p_max: float, noise: NoisePowers, fp_opts: FpOptions) -> AoResult:
    """MRT towards Bob's direct channel, phases from the FP optimizer."""
    if not np.any(ch.h_tb):
        raise ValueError("Heuristic scheme needs a nonzero direct BS-Bob channel")
    w = mrt_beamformer(ch.h_tb, p_max)
    theta0 = PhaseVector.ones(ch.n_irs)
    fp = optimize_phases(ch, w, noise, theta0, fp_opts)
    trace = [secrecy_rate(ch, theta0, w, noise), secrecy_rate(ch, fp.theta, w, noise)]
    return _record(ch, w, fp.theta, noise, trace, 1, fp_iterations=[fp.iterations], cg_iterations=fp.cg_iterations)


def without_irs(ch: ChannelSet, p_max: float, noise: NoisePowers) -> AoResult:
    direct = ch.without_reflection()
    theta = PhaseVector.ones(ch.n_irs)
    w = w_step(direct, theta, p_max, noise)
    return _record(direct, w, theta, noise, [secrecy_rate(direct, theta, w, noise)], 1)


def random_phases(
    ch: ChannelSet,
    p_max: float,
    noise: NoisePowers,
    rng: np.random.Generator,
    trials: int,
) -> AoResult:
    """Best of `trials` uniformly random phase vectors, each with its optimal w."""
    if trials < 1:
        raise ValueError(f"random_phases needs at least one trial, got {trials}")

    best = None
    trace = []
    for _ in range(trials):
        theta = PhaseVector.from_shifts(rng.uniform(0.0, 2.0 * math.pi, ch.n_irs))
        w = w_step(ch, theta, p_max, noise)
        sr = secrecy_rate(ch, theta, w, noise)
        if best is None or sr > best[0]:
            best = (sr, w, theta)
        trace.append(best[0])

    _, w, theta = best
    return _record(ch, w, theta, noise, trace, trials)


def grid_oracle_phases(
    ch: ChannelSet,
    w: Beamformer,
    noise: NoisePowers,
    levels: int,
    chunk_size: int = ORACLE_CHUNK,
) -> Tuple[PhaseVector, float]:
    """Exhaustive argmax of f over the phase grid {2 pi k / levels}^N.

    Grid points are enumerated in lexicographic order of their level
    indices (first reflector most significant); the lowest index wins ties.
    """
    if levels < 1:
        raise ValueError(f"Grid oracle needs levels >= 1, got {levels}")
    if chunk_size < 1:
        raise ValueError(f"chunk_size must be >= 1, got {chunk_size}")
    n = ch.n_irs
    total = levels ** n
    if total > ORACLE_BUDGET:
        raise OracleBudgetError(f"Phase grid of {levels}^{n} = {total} points exceeds the {ORACLE_BUDGET} point budget")

    alphas = build_alphas(ch, w)
    grid = np.exp(-2j * math.pi * np.arange(levels) / levels)
    place = levels ** np.arange(n - 1, -1, -1, dtype=np.int64)

    best_index, best_value = 0, -math.inf
    for start in range(0, total, chunk_size):
        index = np.arange(start, min(start + chunk_size, total), dtype=np.int64)
        digits = (index[:, None] // place[None, :]) % levels
        conj_theta = grid[digits].conj()
        bob = conj_theta @ alphas.alpha_b + alphas.alpha_b_tilde
        eve = conj_theta @ alphas.alpha_e.T + alphas.alpha_e_tilde[None, :]
        values = (np.abs(bob) ** 2 + noise.sigma2_b) / (np.sum(np.abs(eve) ** 2, axis=1) + noise.sigma2_e)
        k = int(np.argmax(values))
        if values[k] > best_value:
            best_index, best_value = int(index[k]), float(values[k])

    digits = (best_index // place) % levels
    theta_best = PhaseVector(grid[digits])
    f_best = objective_f(alphas, theta_best, noise)
    logger.debug(f"Grid oracle: {total} points, best index {best_index}, f={f_best:.6e}")
    return theta_best, f_best
