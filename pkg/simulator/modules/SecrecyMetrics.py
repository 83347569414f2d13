"""
SecrecyMetrics: effective channels, achievable rates and the secrecy rate,
plus the quadratic matrices and alpha terms the optimizers work on.

Phase convention: the stored variable is theta with theta_i = exp(-j psi_i);
the reflection matrix Phi = diag(conj(theta)) is only ever built by
phi_from_theta.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .ChannelGenerator import ChannelSet, dbm_to_watts

logger = logging.getLogger(__name__)

UNIT_MODULUS_TOL = 1e-12
POWER_TOL = 1e-9
MIN_NOISE_POWER = 1e-30


@dataclass(frozen=True)
class PhaseVector:
    theta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=complex).reshape(-1)
        object.__setattr__(self, "theta", theta)
        if theta.size == 0:
            raise ValueError("Phase vector must have at least one entry")
        deviation = np.max(np.abs(np.abs(theta) - 1.0))
        if deviation > UNIT_MODULUS_TOL:
            raise ValueError(f"Phase vector entries must be unit modulus (max deviation {deviation:.3e})")

    @classmethod
    def ones(cls, n: int) -> "PhaseVector":
        return cls(np.ones(n, dtype=complex))

    @classmethod
    def from_shifts(cls, psi: np.ndarray) -> "PhaseVector":
        """Build theta from the IRS phase shifts psi (theta_i = exp(-j psi_i))."""
        return cls(np.exp(-1j * np.asarray(psi, dtype=float)))

    @property
    def n(self) -> int:
        return self.theta.size

    @property
    def shifts(self) -> np.ndarray:
        return np.mod(-np.angle(self.theta), 2 * np.pi)


@dataclass(frozen=True)
class Beamformer:
    w: np.ndarray
    p_max: float
    eigenvalue: Optional[float] = None

    def __post_init__(self):
        w = np.asarray(self.w, dtype=complex).reshape(-1)
        object.__setattr__(self, "w", w)
        if not (self.p_max > 0 and math.isfinite(self.p_max)):
            raise ValueError(f"Power budget must be positive and finite, got {self.p_max}")
        if not np.all(np.isfinite(w)):
            raise ValueError("Beamformer contains non-finite entries")
        if self.power > self.p_max * (1.0 + POWER_TOL):
            raise ValueError(f"Beamformer power {self.power:.6e} W exceeds budget {self.p_max:.6e} W")

    @property
    def power(self) -> float:
        return float(np.vdot(self.w, self.w).real)


@dataclass(frozen=True)
class NoisePowers:
    sigma2_b: float
    sigma2_e: float

    def __post_init__(self):
        for name in ("sigma2_b", "sigma2_e"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= MIN_NOISE_POWER):
                raise ValueError(f"{name} must be at least {MIN_NOISE_POWER} W, got {value}")

    @classmethod
    def from_dbm(cls, bob_dbm: float, eve_dbm: float) -> "NoisePowers":
        return cls(dbm_to_watts(bob_dbm), dbm_to_watts(eve_dbm))


@dataclass(frozen=True)
class AlphaSet:
    alpha_b: np.ndarray        # N
    alpha_b_tilde: complex
    alpha_e: np.ndarray        # M' x N, row i is alpha_E,i
    alpha_e_tilde: np.ndarray  # M'

    @property
    def n(self) -> int:
        return self.alpha_b.size

    @property
    def m_eve(self) -> int:
        return self.alpha_e_tilde.size


def _check_dims(ch: ChannelSet, theta: PhaseVector) -> None:
    if theta.n != ch.n_irs:
        raise ValueError(f"Phase vector has {theta.n} entries but the IRS has {ch.n_irs} reflectors")


def _check_beamformer(ch: ChannelSet, w: Beamformer) -> None:
    if w.w.size != ch.m_bs:
        raise ValueError(f"Beamformer has {w.w.size} entries but the BS has {ch.m_bs} antennas")


def phi_from_theta(theta: PhaseVector) -> np.ndarray:
    return np.diag(np.conj(theta.theta))


def effective_bob(ch: ChannelSet, theta: PhaseVector) -> np.ndarray:
    """h_B with h_B^H = h_IB^H Phi H_TI + h_TB^H."""
    _check_dims(ch, theta)
    row = ch.h_ib.conj() @ phi_from_theta(theta) @ ch.h_ti + ch.h_tb.conj()
    return row.conj()


def effective_eve(ch: ChannelSet, theta: PhaseVector) -> np.ndarray:
    """H_E (M x M') with H_E^H = H_IE^H Phi H_TI + H_TE^H."""
    _check_dims(ch, theta)
    rows = ch.h_ie.conj().T @ phi_from_theta(theta) @ ch.h_ti + ch.h_te.conj().T
    return rows.conj().T


def _log2_1p(x: float) -> float:
    return math.log1p(x) / math.log(2.0)


def rate_bob(ch: ChannelSet, theta: PhaseVector, w: Beamformer, noise: NoisePowers) -> float:
    _check_beamformer(ch, w)
    gain = abs(np.vdot(effective_bob(ch, theta), w.w)) ** 2
    return _log2_1p(gain / noise.sigma2_b)


def rate_eve_det(ch: ChannelSet, theta: PhaseVector, w: Beamformer, noise: NoisePowers) -> float:
    _check_beamformer(ch, w)
    v = effective_eve(ch, theta).conj().T @ w.w
    matrix = np.eye(v.size) + np.outer(v, v.conj()) / noise.sigma2_e
    _, logdet = np.linalg.slogdet(matrix)
    return max(0.0, float(logdet) / math.log(2.0))


def rate_eve_sum(ch: ChannelSet, theta: PhaseVector, w: Beamformer, noise: NoisePowers) -> float:
    _check_beamformer(ch, w)
    v = effective_eve(ch, theta).conj().T @ w.w
    return _log2_1p(float(np.sum(np.abs(v) ** 2)) / noise.sigma2_e)


def secrecy_rate(ch: ChannelSet, theta: PhaseVector, w: Beamformer, noise: NoisePowers) -> float:
    return max(0.0, rate_bob(ch, theta, w, noise) - rate_eve_sum(ch, theta, w, noise))


def build_xb(ch: ChannelSet, theta: PhaseVector, noise: NoisePowers) -> np.ndarray:
    h_b = effective_bob(ch, theta)
    return np.outer(h_b, h_b.conj()) / noise.sigma2_b


def build_xe(ch: ChannelSet, theta: PhaseVector, noise: NoisePowers) -> np.ndarray:
    h_e = effective_eve(ch, theta)
    return (h_e @ h_e.conj().T) / noise.sigma2_e


def build_alphas(ch: ChannelSet, w: Beamformer) -> AlphaSet:
    _check_beamformer(ch, w)
    hti_w = ch.h_ti @ w.w
    return AlphaSet(
        alpha_b=ch.h_ib.conj() * hti_w,
        alpha_b_tilde=complex(np.vdot(ch.h_tb, w.w)),
        alpha_e=ch.h_ie.conj().T * hti_w[np.newaxis, :],
        alpha_e_tilde=ch.h_te.conj().T @ w.w,
    )


def received_amplitudes(alphas: AlphaSet, theta: PhaseVector) -> Tuple[complex, np.ndarray]:
    """(theta^H alpha_B + ~alpha_B, [theta^H alpha_E,i + ~alpha_E,i]_i)."""
    if theta.n != alphas.n:
        raise ValueError(f"Phase vector has {theta.n} entries, alpha terms have {alphas.n}")
    bob = complex(np.vdot(theta.theta, alphas.alpha_b)) + alphas.alpha_b_tilde
    eve = alphas.alpha_e @ theta.theta.conj() + alphas.alpha_e_tilde
    return bob, eve


def eve_denominator(eve: np.ndarray, noise: NoisePowers) -> float:
    return float(np.sum(np.abs(eve) ** 2)) + noise.sigma2_e


def objective_f(alphas: AlphaSet, theta: PhaseVector, noise: NoisePowers) -> float:
    bob, eve = received_amplitudes(alphas, theta)
    return (abs(bob) ** 2 + noise.sigma2_b) / eve_denominator(eve, noise)
