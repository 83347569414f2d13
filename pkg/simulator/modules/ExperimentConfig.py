"""
ExperimentConfig: flat `key = value` experiment documents.

    # distance sweep
    schemes = proposed, heuristic, without_irs
    sweep = d, from = 10, to = 50, step = 2
    realizations = 100

Several assignments may share a line, separated by commas; a comma-separated
piece without `=` continues the list value of the preceding key. Omitted keys
take the defaults from config/config.json.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, List, Optional, Tuple

from ..config import flat_defaults

from .AoDriver import AoOptions
from .CcmManifold import CgOptions
from .ChannelGenerator import (
    ChannelGeometryError,
    PathLossParams,
    RicianParams,
    ScenarioGeometry,
    dbm_to_watts,
)
from .CommentStripper import CommentStripper
from .FpPhaseOptimizer import FpOptions
from .MyEnums import AoInit, Scheme, SweepAxis
from .SecrecyMetrics import MIN_NOISE_POWER, NoisePowers

logger = logging.getLogger(__name__)

MAX_SEED = 2 ** 64 - 1
MAX_SWEEP_POINTS = 100000
SWEEP_ROUND_DIGITS = 12


class ConfigError(ValueError):
    """Invalid experiment configuration; message is `source:line: key: reason`."""

    def __init__(self, source: str, line: Optional[int], key: str, reason: str) -> None:
        self.source = source
        self.line = line
        self.key = key
        self.reason = reason
        super().__init__(f"{source}:{line if line is not None else '?'}: {key}: {reason}")


Check = Callable[[Any], Optional[str]]


@dataclass(frozen=True)
class KeySpec:
    kind: str  # int | float | bool | str | list | one of the enum names below
    check: Optional[Check] = None


def _positive(v) -> Optional[str]:
    return None if v > 0 else f"must be > 0, got {v}"


def _non_negative(v) -> Optional[str]:
    return None if v >= 0 else f"must be >= 0, got {v}"


def _at_least(bound: int) -> Check:
    return lambda v: None if v >= bound else f"must be >= {bound}, got {v}"


def _between(lo: float, hi: float, open_lo: bool = False, open_hi: bool = False) -> Check:
    def check(v):
        if (v > lo if open_lo else v >= lo) and (v < hi if open_hi else v <= hi):
            return None
        left = "(" if open_lo else "["
        right = ")" if open_hi else "]"
        return f"must be in {left}{lo}, {hi}{right}, got {v}"
    return check


def _non_empty(v) -> Optional[str]:
    return None if v else "must not be empty"


_EXPONENT = _between(1.5, 6.0)

KEY_SPECS: Dict[str, KeySpec] = {
    # scenario
    "m_bs": KeySpec("int", _at_least(1)),
    "m_eve": KeySpec("int", _at_least(1)),
    "n_irs": KeySpec("int", _at_least(1)),
    "d_bi": KeySpec("float", _positive),
    "d": KeySpec("float", _positive),
    "d_eve": KeySpec("float", _positive),
    "d_v": KeySpec("float", _non_negative),
    # path loss and fading
    "l0_db": KeySpec("float"),
    "ple_ti": KeySpec("float", _EXPONENT),
    "ple_tb": KeySpec("float", _EXPONENT),
    "ple_te": KeySpec("float", _EXPONENT),
    "ple_ib": KeySpec("float", _EXPONENT),
    "ple_ie": KeySpec("float", _EXPONENT),
    "k_ti": KeySpec("float", _non_negative),
    "k_tb": KeySpec("float", _non_negative),
    "k_te": KeySpec("float", _non_negative),
    "k_ib": KeySpec("float", _non_negative),
    "k_ie": KeySpec("float", _non_negative),
    # power
    "p_max_dbm": KeySpec("float"),
    "noise_bob_dbm": KeySpec("float"),
    "noise_eve_dbm": KeySpec("float"),
    # solver
    "cg_tau": KeySpec("float", _positive),
    "cg_varpi": KeySpec("float", _between(0.0, 1.0, open_lo=True, open_hi=True)),
    "cg_alpha": KeySpec("float", _between(0.0, 1.0, open_lo=True, open_hi=True)),
    "cg_eps": KeySpec("float", _positive),
    "cg_scale_eps_by_n": KeySpec("bool"),
    "cg_max_iters": KeySpec("int", _at_least(1)),
    "cg_max_backtracks": KeySpec("int", _at_least(0)),
    "fp_eps": KeySpec("float", _positive),
    "fp_max_outer": KeySpec("int", _at_least(1)),
    "fp_require_stationary": KeySpec("bool"),
    "ao_eps": KeySpec("float", _positive),
    "ao_max_iters": KeySpec("int", _at_least(1)),
    "ao_init": KeySpec("ao_init"),
    # experiment
    "schemes": KeySpec("list", _non_empty),
    "seed": KeySpec("int", _between(0, MAX_SEED)),
    "realizations": KeySpec("int", _at_least(1)),
    "threads": KeySpec("int", _at_least(1)),
    "sweep": KeySpec("sweep"),
    "sweep_from": KeySpec("float"),
    "sweep_to": KeySpec("float"),
    "sweep_step": KeySpec("float", _positive),
    "output": KeySpec("str", _non_empty),
    "trace_output": KeySpec("str", _non_empty),
    "trace_realizations": KeySpec("int", _at_least(1)),
    "random_trials": KeySpec("int", _at_least(1)),
    "record_wall_time": KeySpec("bool"),
    # oracle check
    "oracle_instances": KeySpec("int", _at_least(1)),
    "oracle_n_irs": KeySpec("int", _at_least(1)),
    "oracle_levels": KeySpec("int", _at_least(1)),
    "oracle_ratio": KeySpec("float", _between(0.0, 1.0, open_lo=True)),
    "oracle_pass_fraction": KeySpec("float", _between(0.0, 1.0)),
}

KEY_ALIASES = {"from": "sweep_from", "to": "sweep_to", "step": "sweep_step"}
GEOMETRY_KEYS = ("m_bs", "m_eve", "n_irs", "d_bi", "d", "d_eve", "d_v")

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _unquote(text: str) -> str:
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in {"'", '"'}:
        return text[1:-1]
    return text


def coerce_value(key: str, raw: Any) -> Any:
    """Convert a raw value (text from a document, or a JSON default) to the key's type.

    Raises ValueError with a reason on bad type or constraint violation.
    """
    spec = KEY_SPECS[key]
    items = raw if isinstance(raw, list) else [raw]
    text = [_unquote(str(item)) for item in items]

    if spec.kind != "list" and len(text) != 1:
        raise ValueError(f"expected a single value, got a list of {len(text)}")

    if spec.kind == "int":
        if isinstance(raw, bool):
            raise ValueError(f"expected an integer, got {raw!r}")
        try:
            value = int(text[0], 10) if isinstance(raw, str) else int(raw)
        except (TypeError, ValueError):
            raise ValueError(f"expected an integer, got {text[0]!r}") from None
        if not isinstance(raw, str) and value != raw:
            raise ValueError(f"expected an integer, got {raw!r}")
    elif spec.kind == "float":
        try:
            value = float(text[0])
        except ValueError:
            raise ValueError(f"expected a number, got {text[0]!r}") from None
        if not math.isfinite(value):
            raise ValueError(f"must be finite, got {text[0]}")
    elif spec.kind == "bool":
        if isinstance(raw, bool):
            value = raw
        elif text[0].lower() in _TRUE:
            value = True
        elif text[0].lower() in _FALSE:
            value = False
        else:
            raise ValueError(f"expected true or false, got {text[0]!r}")
    elif spec.kind == "str":
        value = text[0]
    elif spec.kind == "list":
        value = []
        for item in text:
            try:
                scheme = Scheme(item.lower())
            except ValueError:
                raise ValueError(f"unknown scheme {item!r} (expected one of {', '.join(s.value for s in Scheme)})") from None
            if scheme in value:
                raise ValueError(f"scheme {item!r} listed twice")
            value.append(scheme)
        value = tuple(value)
    elif spec.kind == "ao_init":
        try:
            value = AoInit(text[0].lower())
        except ValueError:
            raise ValueError(f"expected one of {', '.join(a.value for a in AoInit)}, got {text[0]!r}") from None
    elif spec.kind == "sweep":
        try:
            value = SweepAxis(text[0].lower())
        except ValueError:
            raise ValueError(f"expected one of {', '.join(a.value for a in SweepAxis)}, got {text[0]!r}") from None
    else:
        raise ValueError(f"unsupported key kind {spec.kind}")

    if spec.check is not None:
        reason = spec.check(value)
        if reason:
            raise ValueError(reason)
    return value


def split_assignments(content: str) -> List[Tuple[str, List[str]]]:
    """`a = 1, b = x, y` -> [("a", ["1"]), ("b", ["x", "y"])]."""
    assignments: List[Tuple[str, List[str]]] = []
    for piece in _split_unquoted(content, ","):
        if "=" in piece and not _quoted_equals(piece):
            key, _, value = piece.partition("=")
            assignments.append((key.strip(), [value.strip()]))
        elif assignments:
            assignments[-1][1].append(piece.strip())
        else:
            raise ValueError(f"expected `key = value`, got {piece.strip()!r}")
    return assignments


def _split_unquoted(text: str, sep: str) -> List[str]:
    pieces, current, quote = [], [], None
    for ch in text:
        if quote is not None:
            quote = None if ch == quote else quote
        elif ch in {"'", '"'}:
            quote = ch
        elif ch == sep:
            pieces.append("".join(current))
            current = []
            continue
        current.append(ch)
    pieces.append("".join(current))
    return pieces


def _quoted_equals(piece: str) -> bool:
    eq = piece.find("=")
    quote = min((i for i in (piece.find("'"), piece.find('"')) if i >= 0), default=-1)
    return 0 <= quote < eq


@dataclass(frozen=True)
class ExperimentConfig:
    geometry: ScenarioGeometry
    path_loss: PathLossParams
    rician: RicianParams
    p_max_dbm: float
    noise_bob_dbm: float
    noise_eve_dbm: float
    schemes: Tuple[Scheme, ...]
    seed: int
    realizations: int
    threads: int
    sweep: SweepAxis
    sweep_from: float
    sweep_to: float
    sweep_step: float
    output: str
    trace_output: str
    trace_realizations: int
    random_trials: int
    record_wall_time: bool
    ao: AoOptions
    oracle_instances: int
    oracle_n_irs: int
    oracle_levels: int
    oracle_ratio: float
    oracle_pass_fraction: float
    source: str = "<defaults>"

    @property
    def p_max_watts(self) -> float:
        return dbm_to_watts(self.p_max_dbm)

    def noise(self) -> NoisePowers:
        return NoisePowers.from_dbm(self.noise_bob_dbm, self.noise_eve_dbm)

    def sweep_values(self) -> List[float]:
        """Sweep points; a single 0.0 placeholder when nothing is swept."""
        if self.sweep is SweepAxis.NONE:
            return [0.0]
        count = int(math.floor((self.sweep_to - self.sweep_from) / self.sweep_step + 1e-9)) + 1
        return [round(self.sweep_from + k * self.sweep_step, SWEEP_ROUND_DIGITS) for k in range(count)]

    def geometry_at(self, value: float) -> ScenarioGeometry:
        if self.sweep is SweepAxis.DISTANCE:
            return replace(self.geometry, d=float(value))
        if self.sweep is SweepAxis.N_IRS:
            return replace(self.geometry, n_irs=int(round(value)))
        return self.geometry

    def with_overrides(self, **changes: Any) -> "ExperimentConfig":
        """Copy with CLI overrides applied; None values are ignored."""
        changes = {k: v for k, v in changes.items() if v is not None}
        for key, value in changes.items():
            if key in KEY_SPECS:
                try:
                    coerce_value(key, value)
                except ValueError as e:
                    raise ConfigError("<command line>", None, key, str(e)) from None
        return replace(self, **changes)


def _build(values: Dict[str, Any], lines: Dict[str, int], source: str) -> ExperimentConfig:
    def fail(key: str, reason: str):
        raise ConfigError(source, lines.get(key), key, reason)

    try:
        geometry = ScenarioGeometry(
            d_bi=values["d_bi"], d=values["d"], d_tilde=values["d_eve"], d_v=values["d_v"],
            m_bs=values["m_bs"], m_eve=values["m_eve"], n_irs=values["n_irs"],
        )
    except ChannelGeometryError as e:
        set_keys = [k for k in GEOMETRY_KEYS if k in lines]
        fail(max(set_keys, key=lines.get) if set_keys else "d", str(e))

    path_loss = PathLossParams(
        l0_db=values["l0_db"],
        zeta_ti=values["ple_ti"], zeta_tb=values["ple_tb"], zeta_te=values["ple_te"],
        zeta_ib=values["ple_ib"], zeta_ie=values["ple_ie"],
    )
    rician = RicianParams(
        k_ti=values["k_ti"], k_tb=values["k_tb"], k_te=values["k_te"],
        k_ib=values["k_ib"], k_ie=values["k_ie"],
    )

    for key in ("noise_bob_dbm", "noise_eve_dbm"):
        if dbm_to_watts(values[key]) < MIN_NOISE_POWER:
            fail(key, f"noise power below {MIN_NOISE_POWER} W")

    cg = CgOptions(
        tau=values["cg_tau"], varpi=values["cg_varpi"], alpha_bt=values["cg_alpha"],
        eps_grad=values["cg_eps"], max_iters=values["cg_max_iters"],
        max_backtracks=values["cg_max_backtracks"], scale_eps_by_n=values["cg_scale_eps_by_n"],
    )
    ao = AoOptions(
        eps_sr=values["ao_eps"], max_ao=values["ao_max_iters"],
        fp=FpOptions(
            eps_outer=values["fp_eps"], max_outer=values["fp_max_outer"], cg=cg,
            require_stationary=values["fp_require_stationary"],
        ),
        init=values["ao_init"],
    )

    cfg = ExperimentConfig(
        geometry=geometry, path_loss=path_loss, rician=rician,
        p_max_dbm=values["p_max_dbm"], noise_bob_dbm=values["noise_bob_dbm"], noise_eve_dbm=values["noise_eve_dbm"],
        schemes=values["schemes"], seed=values["seed"], realizations=values["realizations"],
        threads=values["threads"], sweep=values["sweep"], sweep_from=values["sweep_from"],
        sweep_to=values["sweep_to"], sweep_step=values["sweep_step"], output=values["output"],
        trace_output=values["trace_output"], trace_realizations=values["trace_realizations"],
        random_trials=values["random_trials"], record_wall_time=values["record_wall_time"], ao=ao,
        oracle_instances=values["oracle_instances"], oracle_n_irs=values["oracle_n_irs"],
        oracle_levels=values["oracle_levels"], oracle_ratio=values["oracle_ratio"],
        oracle_pass_fraction=values["oracle_pass_fraction"], source=source,
    )

    if cfg.sweep is not SweepAxis.NONE:
        if cfg.sweep_to < cfg.sweep_from:
            fail("sweep_to", f"sweep range must be increasing, got from={cfg.sweep_from} to={cfg.sweep_to}")
        points = cfg.sweep_values()
        if len(points) > MAX_SWEEP_POINTS:
            fail("sweep_step", f"sweep has {len(points)} points (limit {MAX_SWEEP_POINTS})")
        for value in points:
            if cfg.sweep is SweepAxis.N_IRS and (value != int(value) or value < 1):
                fail("sweep", f"n_irs sweep points must be integers >= 1, got {value}")
            try:
                cfg.geometry_at(value)
            except ChannelGeometryError as e:
                fail("sweep", f"invalid geometry at sweep point {value}: {e}")

    return cfg


def parse_config(text: str, source_name: str = "<input>") -> ExperimentConfig:
    values: Dict[str, Any] = {}
    for key, raw in flat_defaults().items():
        values[key] = coerce_value(key, raw)

    lines: Dict[str, int] = {}
    stripper = CommentStripper()
    try:
        content_lines = stripper.strip_lines(text.splitlines(), source_name)
    except ValueError as e:
        raise ConfigError(source_name, None, "<syntax>", str(e)) from None

    for line_number, content in content_lines:
        try:
            assignments = split_assignments(content)
        except ValueError as e:
            raise ConfigError(source_name, line_number, "<syntax>", str(e)) from None

        for key, raw in assignments:
            key = KEY_ALIASES.get(key.lower(), key.lower())
            if not key:
                raise ConfigError(source_name, line_number, "<syntax>", "missing key before `=`")
            if key not in KEY_SPECS:
                raise ConfigError(source_name, line_number, key, "unknown key")
            if key in lines:
                raise ConfigError(source_name, line_number, key, f"duplicate key (first set on line {lines[key]})")
            if any(not item for item in raw):
                raise ConfigError(source_name, line_number, key, "missing value")
            try:
                values[key] = coerce_value(key, raw if len(raw) > 1 else raw[0])
            except ValueError as e:
                raise ConfigError(source_name, line_number, key, str(e)) from None
            lines[key] = line_number

    cfg = _build(values, lines, source_name)
    logger.debug(f"Parsed config {source_name}: {len(lines)} keys set, sweep={cfg.sweep.value}")
    return cfg


def load_config(path: Optional[str]) -> ExperimentConfig:
    if path is None:
        return parse_config("", "<defaults>")
    if not os.path.exists(path):
        raise ConfigError(path, None, "<file>", "config file not found")
    try:
        with open(path, "r", encoding="utf-8") as file:
            text = file.read()
    except OSError as e:
        raise ConfigError(path, None, "<file>", f"cannot read config: {e}") from None
    return parse_config(text, path)
