"""
ExperimentRunner: seeded Monte-Carlo sweeps over channel realizations.

Realization r at sweep index s draws its channels from
SeedSequence(seed, spawn_key=(s, r)), so every scheme sees the same
channels and adding realizations never changes earlier ones. Results are
gathered in (sweep index, realization) order whatever the worker count.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np

from .AoDriver import AoResult, maximize_secrecy, w_step
from .Baselines import grid_oracle_phases, heuristic_mrt, random_phases, without_irs
from .ChannelGenerator import ChannelSet, ScenarioGeometry, generate_channels, substream
from .ExperimentConfig import ExperimentConfig
from .FpPhaseOptimizer import optimize_phases
from .MyEnums import RANDOM_PHASES_STREAM_OFFSET, Scheme
from .SecrecyMetrics import PhaseVector

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

RECOVERABLE_ERRORS = (ValueError, ArithmeticError, RuntimeError)


@dataclass(frozen=True)
class ResultRow:
    sweep_value: float
    scheme: Scheme
    mean_sr: float
    std_sr: float
    mean_iters: float
    mean_wall_ms: float
    n_ok: int = 0
    n_failed: int = 0


@dataclass(frozen=True)
class RunOutcome:
    """One scheme on one realization; error is set when the run failed."""
    sweep_index: int
    realization: int
    scheme: Scheme
    secrecy_rate: float = 0.0
    iterations: int = 0
    wall_ms: float = 0.0
    error: Optional[str] = None


@dataclass(frozen=True)
class OracleReport:
    instances: int
    passed: int
    ratios: List[float]
    required_ratio: float
    required_fraction: float

    @property
    def pass_fraction(self) -> float:
        return self.passed / self.instances if self.instances else 0.0

    @property
    def ok(self) -> bool:
        return self.pass_fraction >= self.required_fraction


def realization_seed(base_seed: int, sweep_index: int, realization: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=base_seed, spawn_key=(sweep_index, realization))


def _ordered_map(fn: Callable[[T], R], items: Sequence[T], threads: int) -> List[R]:
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def run_scheme(
    scheme: Scheme,
    ch: ChannelSet,
    cfg: ExperimentConfig,
    seed: np.random.SeedSequence,
) -> AoResult:
    p_max, noise = cfg.p_max_watts, cfg.noise()
    if scheme is Scheme.PROPOSED:
        return maximize_secrecy(ch, p_max, noise, cfg.ao)
    if scheme is Scheme.HEURISTIC:
        return heuristic_mrt(ch, p_max, noise, cfg.ao.fp)
    if scheme is Scheme.WITHOUT_IRS:
        return without_irs(ch, p_max, noise)
    if scheme is Scheme.RANDOM:
        rng = substream(seed, RANDOM_PHASES_STREAM_OFFSET)
        return random_phases(ch, p_max, noise, rng, cfg.random_trials)
    raise ValueError(f"Unknown scheme: {scheme}")


def run_realization(cfg: ExperimentConfig, geometry: ScenarioGeometry, sweep_index: int, realization: int) -> List[RunOutcome]:
    seed = realization_seed(cfg.seed, sweep_index, realization)
    try:
        ch = generate_channels(geometry, cfg.path_loss, cfg.rician, seed)
    except RECOVERABLE_ERRORS as e:
        logger.warning(f"Sweep point {sweep_index}, realization {realization}: channel generation failed: {e}")
        return [RunOutcome(sweep_index, realization, scheme, error=str(e)) for scheme in cfg.schemes]

    outcomes = []
    for scheme in cfg.schemes:
        start = time.perf_counter()
        try:
            result = run_scheme(scheme, ch, cfg, seed)
        except RECOVERABLE_ERRORS as e:
            logger.warning(f"Sweep point {sweep_index}, realization {realization}: {scheme.value} failed: {e}")
            outcomes.append(RunOutcome(sweep_index, realization, scheme, error=str(e)))
            continue
        wall_ms = (time.perf_counter() - start) * 1000.0 if cfg.record_wall_time else 0.0
        outcomes.append(RunOutcome(sweep_index, realization, scheme, result.secrecy_rate, result.iterations, wall_ms))
    return outcomes


def aggregate(sweep_value: float, scheme: Scheme, outcomes: Sequence[RunOutcome]) -> ResultRow:
    ok = [o for o in outcomes if o.error is None]
    failed = sum(1 for o in outcomes if o.error is not None)
    if not ok:
        logger.error(f"Every realization of {scheme.value} failed at sweep value {sweep_value}")
        return ResultRow(sweep_value, scheme, math.nan, math.nan, math.nan, math.nan, 0, failed)

    rates = np.array([o.secrecy_rate for o in ok])
    std = float(np.std(rates, ddof=1)) if rates.size > 1 else 0.0
    return ResultRow(
        sweep_value=sweep_value,
        scheme=scheme,
        mean_sr=float(np.mean(rates)),
        std_sr=std,
        mean_iters=float(np.mean([o.iterations for o in ok])),
        mean_wall_ms=float(np.mean([o.wall_ms for o in ok])),
        n_ok=len(ok),
        n_failed=failed,
    )


def run_experiment(cfg: ExperimentConfig) -> List[ResultRow]:
    rows: List[ResultRow] = []
    points = cfg.sweep_values()
    for sweep_index, value in enumerate(points):
        geometry = cfg.geometry_at(value)
        logger.info(
            f"Sweep point {sweep_index + 1}/{len(points)} ({cfg.sweep.value}={value:g}): "
            f"{cfg.realizations} realizations, schemes {', '.join(s.value for s in cfg.schemes)}"
        )
        per_realization = _ordered_map(
            lambda r: run_realization(cfg, geometry, sweep_index, r),
            list(range(cfg.realizations)),
            cfg.threads,
        )
        for scheme in cfg.schemes:
            outcomes = [o for batch in per_realization for o in batch if o.scheme is scheme]
            row = aggregate(value, scheme, outcomes)
            if row.n_failed:
                logger.warning(f"{scheme.value} at {cfg.sweep.value}={value:g}: {row.n_failed} realization(s) excluded")
            rows.append(row)
    return rows


def average_traces(traces: Sequence[Sequence[float]]) -> List[float]:
    """Entrywise mean, each shorter trace padded with its final value."""
    if not traces:
        return []
    length = max(len(t) for t in traces)
    padded = np.array([list(t) + [t[-1]] * (length - len(t)) for t in traces])
    return [float(v) for v in padded.mean(axis=0)]


def trace_experiment(cfg: ExperimentConfig) -> List[float]:
    """Per-AO-iteration secrecy rate of the proposed scheme, averaged over trace_realizations."""
    geometry = cfg.geometry_at(cfg.sweep_values()[0])

    def one(realization: int) -> List[float]:
        ch = generate_channels(geometry, cfg.path_loss, cfg.rician, realization_seed(cfg.seed, 0, realization))
        return maximize_secrecy(ch, cfg.p_max_watts, cfg.noise(), cfg.ao).sr_trace

    traces = _ordered_map(one, list(range(cfg.trace_realizations)), cfg.threads)
    logger.info(f"Traced {len(traces)} realization(s), longest trace {max(len(t) for t in traces)} entries")
    return average_traces(traces)


def oracle_check(cfg: ExperimentConfig) -> OracleReport:
    """Compare the FP phase optimizer with the exhaustive phase grid on small IRSs."""
    geometry = replace(cfg.geometry, n_irs=cfg.oracle_n_irs)
    p_max, noise = cfg.p_max_watts, cfg.noise()

    def one(instance: int) -> float:
        ch = generate_channels(geometry, cfg.path_loss, cfg.rician, realization_seed(cfg.seed, 0, instance))
        theta0 = PhaseVector.ones(ch.n_irs)
        w = w_step(ch, theta0, p_max, noise)
        fp = optimize_phases(ch, w, noise, theta0, cfg.ao.fp)
        _, f_best = grid_oracle_phases(ch, w, noise, cfg.oracle_levels)
        return fp.objective / f_best

    ratios = _ordered_map(one, list(range(cfg.oracle_instances)), cfg.threads)
    passed = sum(1 for ratio in ratios if ratio >= cfg.oracle_ratio)
    report = OracleReport(cfg.oracle_instances, passed, ratios, cfg.oracle_ratio, cfg.oracle_pass_fraction)
    logger.info(f"Oracle check: {passed}/{report.instances} instances reached {cfg.oracle_ratio:g} of the grid best")
    return report
