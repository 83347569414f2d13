"""
InvariantSuite: quick numerical self-checks behind the `selftest` verb.

Each check draws a handful of seeded channel realizations from the active
config and verifies one identity or optimality property of the solvers.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, replace
from typing import Callable, List

import numpy as np

from .AoDriver import maximize_secrecy, w_step
from .Baselines import grid_oracle_phases
from .Beamforming import p1a_objective
from .CcmManifold import CcmPoint, QuadraticForm, euclidean_grad, f2_value, f3_value, inner, riemannian_grad
from .ChannelGenerator import ChannelSet, generate_channels
from .ExperimentConfig import ExperimentConfig
from .FpPhaseOptimizer import build_quadratic, f1_value, optimize_phases, update_aux
from .SecrecyMetrics import (
    PhaseVector,
    build_alphas,
    build_xb,
    build_xe,
    objective_f,
    rate_eve_det,
    rate_eve_sum,
)

logger = logging.getLogger(__name__)

SELFTEST_SEED = 20240601
FAST_AO_ITERATIONS = 5
FAST_AO_FRACTION = 0.9


class _CheckFailed(Exception):
    pass


def _require(condition, message: str) -> None:
    if not condition:
        raise _CheckFailed(message)


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: str = ""
    seconds: float = 0.0

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} | {self.name}: {self.details} ({self.seconds:.2f}s)"


class InvariantSuite:
    def __init__(self, cfg: ExperimentConfig, instances: int = 10) -> None:
        self.cfg = cfg
        self.instances = instances
        self.rng = np.random.default_rng(SELFTEST_SEED)

    def _channels(self, index: int, n_irs: int = 0) -> ChannelSet:
        geometry = self.cfg.geometry if n_irs <= 0 else replace(self.cfg.geometry, n_irs=n_irs)
        seed = np.random.SeedSequence(entropy=SELFTEST_SEED, spawn_key=(index,))
        return generate_channels(geometry, self.cfg.path_loss, self.cfg.rician, seed)

    def _random_theta(self, n: int) -> PhaseVector:
        return PhaseVector.from_shifts(self.rng.uniform(0.0, 2.0 * math.pi, n))

    def check_rate_identity(self) -> str:
        worst = 0.0
        for i in range(self.instances):
            ch = self._channels(i)
            theta = self._random_theta(ch.n_irs)
            w = w_step(ch, theta, self.cfg.p_max_watts, self.cfg.noise())
            worst = max(worst, abs(rate_eve_det(ch, theta, w, self.cfg.noise()) - rate_eve_sum(ch, theta, w, self.cfg.noise())))
        _require(worst <= 1e-9, f"det/sum rate gap {worst:.3e}")
        return f"max |R_E det - R_E sum| = {worst:.2e}"

    def check_beamformer_optimality(self) -> str:
        p_max, noise = self.cfg.p_max_watts, self.cfg.noise()
        for i in range(self.instances):
            ch = self._channels(i)
            theta = self._random_theta(ch.n_irs)
            xb, xe = build_xb(ch, theta, noise), build_xe(ch, theta, noise)
            best = p1a_objective(w_step(ch, theta, p_max, noise).w, xb, xe)
            for _ in range(200):
                v = self.rng.standard_normal(ch.m_bs) + 1j * self.rng.standard_normal(ch.m_bs)
                v *= math.sqrt(p_max) / np.linalg.norm(v)
                _require(p1a_objective(v, xb, xe) <= best * (1 + 1e-9), f"instance {i}: random beamformer beats w*")
        return f"{self.instances} instances x 200 random beamformers"

    def check_fp_identities(self) -> str:
        noise = self.cfg.noise()
        worst = 0.0
        for i in range(self.instances):
            ch = self._channels(i)
            w = w_step(ch, PhaseVector.ones(ch.n_irs), self.cfg.p_max_watts, noise)
            alphas = build_alphas(ch, w)
            for _ in range(5):
                theta = self._random_theta(ch.n_irs)
                aux = update_aux(alphas, theta, noise)
                f = objective_f(alphas, theta, noise)
                worst = max(worst, abs(f1_value(alphas, theta, aux, noise) - f) / abs(f))
                quad = build_quadratic(alphas, aux, noise)
                other = self._random_theta(ch.n_irs)
                surrogate = f2_value(quad, CcmPoint(other.theta))
                worst = max(worst, abs(f1_value(alphas, other, aux, noise) - surrogate) / max(abs(surrogate), 1.0))
        _require(worst <= 1e-10, f"relative FP identity error {worst:.3e}")
        return f"max relative error {worst:.2e}"

    def check_manifold_gradient(self) -> str:
        n, h = 16, 1e-6
        worst, worst_tangency = 0.0, 0.0
        for _ in range(self.instances):
            a = self.rng.standard_normal((n, n)) + 1j * self.rng.standard_normal((n, n))
            quad = QuadraticForm(a @ a.conj().T, self.rng.standard_normal(n) + 1j * self.rng.standard_normal(n))
            point = CcmPoint(self._random_theta(n).theta)
            speed = self.rng.standard_normal(n)
            # theta(t) = theta * exp(j t speed) has velocity xi = j speed theta
            xi = 1j * speed * point.theta
            exact = inner(xi, euclidean_grad(quad, point))
            plus = f3_value(quad, CcmPoint(point.theta * np.exp(1j * h * speed)))
            minus = f3_value(quad, CcmPoint(point.theta * np.exp(-1j * h * speed)))
            numeric = (plus - minus) / (2 * h)
            worst = max(worst, abs(numeric - exact) / max(abs(exact), 1.0))
            grad = riemannian_grad(quad, point).zeta
            worst_tangency = max(worst_tangency, float(np.max(np.abs(np.real(grad.conj() * point.theta)))))
        _require(worst <= 1e-5, f"directional derivative mismatch {worst:.3e}")
        _require(worst_tangency <= 1e-10, f"Riemannian gradient leaves the tangent space by {worst_tangency:.3e}")
        return f"max relative error {worst:.2e}, tangency {worst_tangency:.1e}"

    def check_ao_monotonicity(self) -> str:
        converged = 0
        for i in range(self.instances):
            result = maximize_secrecy(self._channels(i), self.cfg.p_max_watts, self.cfg.noise(), self.cfg.ao)
            steps = np.diff(result.sr_trace)
            _require(np.all(steps >= -1e-9), f"instance {i}: secrecy rate decreased by {-steps.min():.3e}")
            converged += result.iterations <= FAST_AO_ITERATIONS
        required = math.floor(FAST_AO_FRACTION * self.instances)
        summary = f"{converged}/{self.instances} runs converged within {FAST_AO_ITERATIONS} AO iterations"
        _require(converged >= required, f"{summary} (need {required})")
        return summary

    def check_grid_oracle(self) -> str:
        noise = self.cfg.noise()
        passed = 0
        for i in range(self.instances):
            ch = self._channels(i, n_irs=3)
            theta0 = PhaseVector.ones(ch.n_irs)
            w = w_step(ch, theta0, self.cfg.p_max_watts, noise)
            fp = optimize_phases(ch, w, noise, theta0, self.cfg.ao.fp)
            _, f_best = grid_oracle_phases(ch, w, noise, 16)
            passed += fp.objective >= self.cfg.oracle_ratio * f_best
        required = math.floor(self.cfg.oracle_pass_fraction * self.instances)
        _require(passed >= required, f"{passed}/{self.instances} reached {self.cfg.oracle_ratio:g} of the grid best (need {required})")
        return f"{passed}/{self.instances} reached {self.cfg.oracle_ratio:g} of the grid best"

    def run(self) -> List[CheckResult]:
        checks: List[Callable[[], str]] = [
            self.check_rate_identity,
            self.check_beamformer_optimality,
            self.check_fp_identities,
            self.check_manifold_gradient,
            self.check_ao_monotonicity,
            self.check_grid_oracle,
        ]
        results = []
        for check in checks:
            name = check.__name__.replace("check_", "")
            start = time.perf_counter()
            try:
                details = check()
                passed = True
            except _CheckFailed as e:
                details, passed = str(e), False
            except (ValueError, ArithmeticError, RuntimeError) as e:
                details, passed = f"error: {e}", False
            result = CheckResult(name, passed, details, time.perf_counter() - start)
            logger.debug(str(result))
            results.append(result)
        return results
