"""
AoDriver: alternating optimization of the BS beamformer w and the IRS
phases theta. The w-step is the closed-form generalized eigen beamformer,
the theta-step is the FP phase optimizer warm-started at the current phases.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .Beamforming import mrt_beamformer, normalize_phase, optimal_beamformer
from .ChannelGenerator import ChannelSet
from .FpPhaseOptimizer import FpOptions, optimize_phases
from .MyEnums import AoInit
from .SecrecyMetrics import (
    Beamformer,
    NoisePowers,
    PhaseVector,
    build_xb,
    build_xe,
    rate_bob,
    rate_eve_sum,
    secrecy_rate,
)

logger = logging.getLogger(__name__)

ZERO_SR = 1e-12
MONOTONE_TOL = 1e-9


@dataclass
class AoOptions:
    eps_sr: float = 1e-3
    max_ao: int = 20
    fp: FpOptions = field(default_factory=FpOptions)
    init: AoInit = AoInit.IRS_PRINCIPAL

    def __post_init__(self):
        if self.eps_sr <= 0:
            raise ValueError(f"eps_sr must be positive, got {self.eps_sr}")
        if self.max_ao < 1:
            raise ValueError(f"max_ao must be >= 1, got {self.max_ao}")
        self.init = AoInit(self.init)


@dataclass(frozen=True)
class AoResult:
    w_star: Beamformer
    theta_star: PhaseVector
    secrecy_rate: float
    sr_trace: List[float]
    iterations: int
    rate_bob: float = 0.0
    rate_eve: float = 0.0
    fp_iterations: List[int] = field(default_factory=list)
    cg_iterations: int = 0


def init_state(ch: ChannelSet, p_max: float, init: AoInit = AoInit.IRS_PRINCIPAL) -> Tuple[Beamformer, PhaseVector]:
    theta0 = PhaseVector.ones(ch.n_irs)
    init = AoInit(init)

    if init is AoInit.DIRECT_MRT:
        return mrt_beamformer(ch.h_tb, p_max), theta0
    if init is AoInit.IRS_ROW:
        return mrt_beamformer(ch.h_ti[0].conj(), p_max), theta0

    # Transmit direction best coupled into the IRS
    _, _, vh = np.linalg.svd(ch.h_ti)
    direction = normalize_phase(vh[0].conj())
    return Beamformer(w=math.sqrt(p_max) * direction / np.linalg.norm(direction), p_max=p_max), theta0


def w_step(ch: ChannelSet, theta: PhaseVector, p_max: float, noise: NoisePowers) -> Beamformer:
    return optimal_beamformer(build_xb(ch, theta, noise), build_xe(ch, theta, noise), p_max)


def has_converged(previous: float, current: float, eps: float) -> bool:
    if current < ZERO_SR:
        return abs(current - previous) <= ZERO_SR
    return abs(current - previous) / abs(current) <= eps


def maximize_secrecy(ch: ChannelSet, p_max: float, noise: NoisePowers, opts: AoOptions) -> AoResult:
    w, theta = init_state(ch, p_max, opts.init)
    sr = secrecy_rate(ch, theta, w, noise)
    trace = [sr]
    fp_iterations: List[int] = []
    cg_total = 0
    iterations = 0

    for i in range(opts.max_ao):
        w = w_step(ch, theta, p_max, noise)
        fp = optimize_phases(ch, w, noise, theta, opts.fp)
        theta = fp.theta
        fp_iterations.append(fp.iterations)
        cg_total += fp.cg_iterations
        iterations = i + 1

        current = secrecy_rate(ch, theta, w, noise)
        if current < sr - MONOTONE_TOL:
            logger.warning(f"AO iteration {iterations}: secrecy rate dropped from {sr:.9f} to {current:.9f}")
        trace.append(current)
        logger.debug(f"AO iteration {iterations}: R_S={current:.6f} fp_iters={fp.iterations} cg_iters={fp.cg_iterations}")

        done = has_converged(sr, current, opts.eps_sr)
        sr = current
        if done:
            break
    else:
        logger.info(f"AO stopped at the iteration limit ({opts.max_ao}) with R_S={sr:.6f}")

    return AoResult(
        w_star=w,
        theta_star=theta,
        secrecy_rate=sr,
        sr_trace=trace,
        iterations=iterations,
        rate_bob=rate_bob(ch, theta, w, noise),
        rate_eve=rate_eve_sum(ch, theta, w, noise),
        fp_iterations=fp_iterations,
        cg_iterations=cg_total,
    )
