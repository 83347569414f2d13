"""
FpPhaseOptimizer: fractional-programming loop for the IRS phases.

The ratio f(theta) = (|b|^2 + sigma_B^2) / D is lower-bounded by the
quadratic transform
    f1(theta, y) = 2Re[y1^* b + y2^* sigma_B] - (|y1|^2 + |y2|^2) D
which is tight at y1 = b / D, y2 = sigma_B / D. For fixed y, f1 is the
concave quadratic -f3(theta) + C handed to the manifold CG solver,
after rescaling to unit size (the minimizer is unchanged).

sigma_B here is the noise standard deviation sqrt(sigma2_b), so that
|[b, sigma_B]|^2 reproduces the numerator of f.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .CcmManifold import CcmPoint, CgOptions, QuadraticForm, minimize_qcqp, riemannian_grad
from .ChannelGenerator import ChannelSet
from .MyEnums import CgStatus
from .SecrecyMetrics import (
    AlphaSet,
    Beamformer,
    NoisePowers,
    PhaseVector,
    build_alphas,
    eve_denominator,
    objective_f,
    received_amplitudes,
)

logger = logging.getLogger(__name__)

MONOTONE_TOL = 1e-9


@dataclass(frozen=True)
class FpAux:
    y1: complex
    y2: complex

    def __post_init__(self):
        if not (np.isfinite(self.y1) and np.isfinite(self.y2)):
            raise ValueError(f"Auxiliary variables must be finite, got y1={self.y1} y2={self.y2}")

    @property
    def weight(self) -> float:
        """|y1|^2 + |y2|^2"""
        return abs(self.y1) ** 2 + abs(self.y2) ** 2


@dataclass
class FpOptions:
    eps_outer: float = 1e-3
    max_outer: int = 50
    cg: CgOptions = field(default_factory=CgOptions)
    # a settled f only ends the loop once theta is stationary for its own surrogate
    require_stationary: bool = True

    def __post_init__(self):
        if self.eps_outer <= 0:
            raise ValueError(f"eps_outer must be positive, got {self.eps_outer}")
        if self.max_outer < 1:
            raise ValueError(f"max_outer must be >= 1, got {self.max_outer}")


@dataclass(frozen=True)
class FpResult:
    theta: PhaseVector
    trace: List[float]
    iterations: int
    cg_iterations: int

    @property
    def objective(self) -> float:
        return self.trace[-1]


def update_aux(alphas: AlphaSet, theta: PhaseVector, noise: NoisePowers) -> FpAux:
    bob, eve = received_amplitudes(alphas, theta)
    denom = eve_denominator(eve, noise)
    return FpAux(y1=bob / denom, y2=complex(math.sqrt(noise.sigma2_b) / denom))


def f1_value(alphas: AlphaSet, theta: PhaseVector, aux: FpAux, noise: NoisePowers) -> float:
    bob, eve = received_amplitudes(alphas, theta)
    linear = 2.0 * (np.conj(aux.y1) * bob + np.conj(aux.y2) * math.sqrt(noise.sigma2_b)).real
    return float(linear - aux.weight * eve_denominator(eve, noise))


def build_quadratic(alphas: AlphaSet, aux: FpAux, noise: NoisePowers) -> QuadraticForm:
    s = aux.weight
    a_e = alphas.alpha_e
    u = s * (a_e.T @ a_e.conj())
    u = 0.5 * (u + u.conj().T)
    gamma = np.conj(aux.y1) * alphas.alpha_b - s * (a_e.T @ np.conj(alphas.alpha_e_tilde))
    c = 2.0 * (np.conj(aux.y1) * alphas.alpha_b_tilde + np.conj(aux.y2) * math.sqrt(noise.sigma2_b)).real
    c -= s * (float(np.sum(np.abs(alphas.alpha_e_tilde) ** 2)) + noise.sigma2_e)
    return QuadraticForm(u=u, gamma=gamma, c=float(c))


def surrogate_grad_norm_sq(alphas: AlphaSet, theta: PhaseVector, noise: NoisePowers) -> float:
    """Squared Riemannian gradient of the normalized surrogate built at theta itself."""
    quad = build_quadratic(alphas, update_aux(alphas, theta, noise), noise).normalized()
    return riemannian_grad(quad, CcmPoint(theta.theta)).norm_sq()


def is_stationary(alphas: AlphaSet, theta: PhaseVector, noise: NoisePowers, cg: CgOptions) -> bool:
    return surrogate_grad_norm_sq(alphas, theta, noise) <= cg.threshold(theta.n)


def optimize_phases(
    ch: ChannelSet,
    w: Beamformer,
    noise: NoisePowers,
    theta0: PhaseVector,
    opts: FpOptions,
) -> FpResult:
    if theta0.n != ch.n_irs:
        raise ValueError(f"Initial phase vector has {theta0.n} entries but the IRS has {ch.n_irs} reflectors")

    alphas = build_alphas(ch, w)
    theta = theta0
    f_prev = objective_f(alphas, theta, noise)
    trace = [f_prev]
    cg_total = 0
    iterations = 0

    for q in range(opts.max_outer):
        aux = update_aux(alphas, theta, noise)
        # f1 is scaled by |y|^2 ~ 1/D; the CG threshold is applied to the scale-free form
        quad = build_quadratic(alphas, aux, noise).normalized()
        cg = minimize_qcqp(quad, CcmPoint(theta.theta), opts.cg)
        cg_total += cg.iterations
        iterations = q + 1

        candidate = PhaseVector(cg.theta.theta)
        f_next = objective_f(alphas, candidate, noise)
        if f_next < f_prev - MONOTONE_TOL * max(1.0, abs(f_prev)):
            logger.warning(f"FP iteration {iterations}: objective fell from {f_prev:.6e} to {f_next:.6e}, keeping previous phases")
            break

        theta = candidate
        trace.append(f_next)
        logger.debug(f"FP iteration {iterations}: f={f_next:.6e} cg_iters={cg.iterations} status={cg.status.value}")

        if cg.iterations == 0 and cg.status is CgStatus.LINE_SEARCH_FAILED:
            logger.warning(f"FP iteration {iterations}: inner solver could not move, stopping")
            break
        if abs(f_next - f_prev) <= opts.eps_outer * abs(f_next):
            if not opts.require_stationary or is_stationary(alphas, theta, noise, opts.cg):
                break
            logger.debug(f"FP iteration {iterations}: f has settled but the phases are not stationary yet")
        f_prev = f_next
    else:
        logger.debug(f"FP stopped at the outer iteration limit ({opts.max_outer})")

    return FpResult(theta=theta, trace=trace, iterations=iterations, cg_iterations=cg_total)
