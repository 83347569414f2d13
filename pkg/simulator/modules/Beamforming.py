"""
Beamforming: closed-form transmit beamformer for fixed IRS phases.

For ||w||^2 = P the ratio (w^H X_B w + 1) / (w^H X_E w + 1) equals the
Rayleigh quotient of the regularized pair (X_B + I/P, X_E + I/P), so the
optimum is the top generalized eigenvector scaled to full power.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.linalg

from .SecrecyMetrics import Beamformer

logger = logging.getLogger(__name__)

EIGEN_TIE_TOL = 1e-10


@dataclass(frozen=True)
class RegularizedPair:
    xb_bar: np.ndarray
    xe_bar: np.ndarray

    @classmethod
    def build(cls, xb: np.ndarray, xe: np.ndarray, p_max: float) -> "RegularizedPair":
        return cls(regularize(xb, p_max), regularize(xe, p_max))


def regularize(x: np.ndarray, p_max: float) -> np.ndarray:
    if p_max <= 0:
        raise ValueError(f"Power budget must be positive, got {p_max}")
    x = np.asarray(x, dtype=complex)
    return x + np.eye(x.shape[0]) / p_max


def normalize_phase(v: np.ndarray) -> np.ndarray:
    """Rotate v so its largest-magnitude entry is real positive."""
    pivot = v[int(np.argmax(np.abs(v)))]
    if pivot == 0:
        return v
    return v * (abs(pivot) / pivot)


def generalized_top_eigenpair(xb_bar: np.ndarray, xe_bar: np.ndarray) -> Tuple[float, np.ndarray]:
    """Largest eigenvalue of xb_bar v = lambda xe_bar v and a unit-norm eigenvector.

    Uses xe_bar = L L^H and the Hermitian standard problem L^-1 xb_bar L^-H.
    """
    lower = scipy.linalg.cholesky(xe_bar, lower=True)
    left = scipy.linalg.solve_triangular(lower, xb_bar, lower=True)
    reduced = scipy.linalg.solve_triangular(lower, left.conj().T, lower=True)
    reduced = 0.5 * (reduced + reduced.conj().T)
    eigenvalues, eigenvectors = scipy.linalg.eigh(reduced)

    top = eigenvalues[-1]
    tied = [i for i in range(eigenvalues.size) if top - eigenvalues[i] <= EIGEN_TIE_TOL * max(abs(top), 1.0)]

    candidates = []
    for index in tied:
        v = scipy.linalg.solve_triangular(lower, eigenvectors[:, index], lower=True, trans="C")
        v = normalize_phase(v / np.linalg.norm(v))
        candidates.append(v)
    if len(candidates) > 1:
        logger.debug(f"Degenerate top generalized eigenvalue ({len(candidates)}-fold), applying tie-break")
    best = max(candidates, key=lambda v: tuple(np.round(v.real, 12)))
    return float(top), best


def optimal_beamformer(xb: np.ndarray, xe: np.ndarray, p_max: float) -> Beamformer:
    xb = np.asarray(xb, dtype=complex)
    xe = np.asarray(xe, dtype=complex)
    if not (np.all(np.isfinite(xb)) and np.all(np.isfinite(xe)) and math.isfinite(p_max)):
        raise ValueError("Beamformer inputs must be finite")
    pair = RegularizedPair.build(xb, xe, p_max)
    eigenvalue, direction = generalized_top_eigenpair(pair.xb_bar, pair.xe_bar)
    w = normalize_phase(math.sqrt(p_max) * direction / np.linalg.norm(direction))
    return Beamformer(w=w, p_max=p_max, eigenvalue=eigenvalue)


def p1a_objective(w: np.ndarray, xb: np.ndarray, xe: np.ndarray) -> float:
    """(w^H X_B w + 1) / (w^H X_E w + 1)."""
    num = np.vdot(w, xb @ w).real + 1.0
    den = np.vdot(w, xe @ w).real + 1.0
    return float(num / den)


def mrt_beamformer(h: np.ndarray, p_max: float) -> Beamformer:
    """Maximum ratio transmission towards channel h."""
    norm = np.linalg.norm(h)
    if norm == 0:
        raise ValueError("MRT needs a nonzero channel")
    return Beamformer(w=normalize_phase(math.sqrt(p_max) * h / norm), p_max=p_max)
