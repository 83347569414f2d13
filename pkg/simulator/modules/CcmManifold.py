"""
CcmManifold: conjugate-gradient minimization of
    f3(theta) = theta^H U theta - theta^H gamma - gamma^H theta
over the complex circle manifold {theta : |theta_i| = 1}.

Inner products on tangent vectors use the real metric <a, b> = Re[a^H b].
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .MyEnums import CgStatus

logger = logging.getLogger(__name__)

UNIT_MODULUS_TOL = 1e-12
TANGENCY_TOL = 1e-10
HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
MIN_RETRACTION_MODULUS = 1e-300
BETA_RESTART_NORM = 1e-30


class DegenerateRetractionError(ValueError):
    """Retraction of a vector with a (numerically) zero entry."""


class LineSearchFailure(RuntimeError):
    """Armijo backtracking ran out of trial steps."""


@dataclass(frozen=True)
class QuadraticForm:
    u: np.ndarray
    gamma: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex)
        gamma = np.asarray(self.gamma, dtype=complex).reshape(-1)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "gamma", gamma)
        if u.shape != (gamma.size, gamma.size):
            raise ValueError(f"U has shape {u.shape}, expected {(gamma.size, gamma.size)}")
        scale = max(1.0, float(np.max(np.abs(u))) if u.size else 0.0)
        if np.max(np.abs(u - u.conj().T), initial=0.0) > HERMITIAN_TOL * scale:
            raise ValueError("U must be Hermitian")
        if np.linalg.eigvalsh(u)[0] < -PSD_TOL * scale:
            raise ValueError("U must be positive semidefinite")

    @property
    def n(self) -> int:
        return self.gamma.size

    @property
    def scale(self) -> float:
        """Mean over rows of sum_j |U_ij| + |gamma_i|, which bounds |(U theta - gamma)_i| on the manifold."""
        if self.n == 0:
            return 0.0
        return float((np.sum(np.abs(self.u)) + np.sum(np.abs(self.gamma))) / self.n)

    def normalized(self) -> "QuadraticForm":
        """Same minimizer with gradients of order one, so that an absolute
        gradient threshold means the same thing for every channel scale."""
        s = self.scale
        if s == 0.0:
            return self
        return QuadraticForm(u=self.u / s, gamma=self.gamma / s, c=self.c / s)


@dataclass(frozen=True)
class CcmPoint:
    theta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=complex).reshape(-1)
        object.__setattr__(self, "theta", theta)
        deviation = np.max(np.abs(np.abs(theta) - 1.0))
        if deviation > UNIT_MODULUS_TOL:
            raise ValueError(f"Point is off the complex circle manifold (max deviation {deviation:.3e})")


@dataclass(frozen=True)
class TangentVector:
    zeta: np.ndarray
    at: CcmPoint

    def __post_init__(self):
        zeta = np.asarray(self.zeta, dtype=complex).reshape(-1)
        object.__setattr__(self, "zeta", zeta)
        if zeta.shape != self.at.theta.shape:
            raise ValueError(f"Tangent vector has shape {zeta.shape}, point has {self.at.theta.shape}")
        residual = np.max(np.abs(np.real(zeta.conj() * self.at.theta)), initial=0.0)
        if residual > TANGENCY_TOL * max(1.0, float(np.max(np.abs(zeta), initial=0.0))):
            raise ValueError(f"Vector is not tangent at the given point (residual {residual:.3e})")

    def __neg__(self) -> "TangentVector":
        return TangentVector(-self.zeta, self.at)

    def norm_sq(self) -> float:
        return inner(self.zeta, self.zeta)


@dataclass
class CgOptions:
    tau: float = 1.0
    varpi: float = 2.0 ** -13
    alpha_bt: float = 0.5
    eps_grad: float = 1e-3
    max_iters: int = 500
    max_backtracks: int = 50
    scale_eps_by_n: bool = True

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not (0 < self.varpi < 1):
            raise ValueError(f"varpi must be in (0, 1), got {self.varpi}")
        if not (0 < self.alpha_bt < 1):
            raise ValueError(f"alpha_bt must be in (0, 1), got {self.alpha_bt}")
        if self.eps_grad <= 0:
            raise ValueError(f"eps_grad must be positive, got {self.eps_grad}")
        if self.max_iters < 1 or self.max_backtracks < 0:
            raise ValueError("max_iters must be >= 1 and max_backtracks >= 0")

    def threshold(self, n: int) -> float:
        return self.eps_grad * n if self.scale_eps_by_n else self.eps_grad


@dataclass(frozen=True)
class CgResult:
    theta: CcmPoint
    trace: List[float] = field(default_factory=list)
    iterations: int = 0
    grad_norm_sq: float = 0.0
    status: CgStatus = CgStatus.CONVERGED


def inner(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.vdot(a, b).real)


def f3_value(q: QuadraticForm, p: CcmPoint) -> float:
    theta = p.theta
    return float(np.vdot(theta, q.u @ theta).real - 2.0 * np.vdot(theta, q.gamma).real)


def f2_value(q: QuadraticForm, p: CcmPoint) -> float:
    """Surrogate value -f3 + C."""
    return -f3_value(q, p) + q.c


def euclidean_grad(q: QuadraticForm, p: CcmPoint) -> np.ndarray:
    return 2.0 * (q.u @ p.theta - q.gamma)


def project_tangent(v: np.ndarray, p: CcmPoint) -> TangentVector:
    v = np.asarray(v, dtype=complex)
    return TangentVector(v - np.real(v.conj() * p.theta) * p.theta, p)


def riemannian_grad(q: QuadraticForm, p: CcmPoint) -> TangentVector:
    return project_tangent(euclidean_grad(q, p), p)


def transport(zeta: TangentVector, to: CcmPoint) -> TangentVector:
    return project_tangent(zeta.zeta, to)


def retract(x: np.ndarray) -> CcmPoint:
    x = np.asarray(x, dtype=complex)
    modulus = np.abs(x)
    if np.any(modulus < MIN_RETRACTION_MODULUS):
        raise DegenerateRetractionError("Cannot retract a vector with a zero entry")
    return CcmPoint(x / modulus)


def pr_beta(g_new: TangentVector, g_old_transported: TangentVector, g_old: TangentVector) -> float:
    """Polak-Ribiere+ coefficient."""
    denom = g_old.norm_sq()
    if denom < BETA_RESTART_NORM:
        return 0.0
    return max(0.0, inner(g_new.zeta, g_new.zeta - g_old_transported.zeta) / denom)


def armijo_search(
    q: QuadraticForm,
    p: CcmPoint,
    zeta: TangentVector,
    grad: TangentVector,
    opts: CgOptions,
) -> Tuple[float, CcmPoint]:
    slope = inner(zeta.zeta, grad.zeta)
    if slope >= 0:
        raise ValueError("Armijo search needs a descent direction")

    f0 = f3_value(q, p)
    step = opts.tau
    for _ in range(opts.max_backtracks + 1):
        candidate = retract(p.theta + step * zeta.zeta)
        if f3_value(q, candidate) - f0 <= opts.varpi * step * slope:
            return step, candidate
        step *= opts.alpha_bt
    raise LineSearchFailure(f"No Armijo step found after {opts.max_backtracks} backtracks")


def minimize_qcqp(q: QuadraticForm, theta0: CcmPoint, opts: CgOptions) -> CgResult:
    if theta0.theta.size != q.n:
        raise ValueError(f"Initial point has {theta0.theta.size} entries, quadratic has {q.n}")

    point = theta0
    trace = [f3_value(q, point)]
    grad = riemannian_grad(q, point)
    threshold = opts.threshold(q.n)
    if grad.norm_sq() <= threshold:
        return CgResult(point, trace, 0, grad.norm_sq(), CgStatus.CONVERGED)

    zeta, steepest = -grad, True
    status = CgStatus.MAX_ITERS
    iterations = 0
    for k in range(opts.max_iters):
        if not steepest and inner(zeta.zeta, grad.zeta) >= 0:
            zeta, steepest = -grad, True
        try:
            step, next_point = armijo_search(q, point, zeta, grad, opts)
        except LineSearchFailure:
            if steepest:
                status = CgStatus.LINE_SEARCH_FAILED
                break
            logger.debug(f"CG iteration {k}: line search failed, restarting along -grad")
            zeta = -grad
            try:
                step, next_point = armijo_search(q, point, zeta, grad, opts)
            except LineSearchFailure:
                status = CgStatus.LINE_SEARCH_FAILED
                break

        next_grad = riemannian_grad(q, next_point)
        beta = pr_beta(next_grad, transport(grad, next_point), grad)
        zeta = TangentVector(-next_grad.zeta + beta * transport(zeta, next_point).zeta, next_point)
        steepest = beta == 0.0
        point, grad = next_point, next_grad
        trace.append(f3_value(q, point))
        iterations = k + 1

        if grad.norm_sq() <= threshold:
            status = CgStatus.CONVERGED
            break

    if status is CgStatus.LINE_SEARCH_FAILED:
        logger.debug(f"CG stopped after {iterations} iterations: steepest-descent line search failed")
    logger.debug(f"CG finished: status={status.value} iterations={iterations} |grad|^2={grad.norm_sq():.3e}")
    return CgResult(point, trace, iterations, grad.norm_sq(), status)
