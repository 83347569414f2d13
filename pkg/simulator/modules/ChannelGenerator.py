"""
ChannelGenerator: seeded Rician-fading channel realizations for the
BS / IRS / Bob / Eve geometry.

Layout: BS at the origin, IRS at (d_bi, 0), Bob at (d, d_v), Eve at
(d_tilde, d_v). The BS array, the IRS and Eve's array are half-wavelength
ULAs along the x-axis.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Tuple, Union

import numpy as np

from .MyEnums import Link, LINK_STREAM_OFFSETS

logger = logging.getLogger(__name__)

MIN_LINK_DISTANCE = 0.5  # meters; the path-loss law is far-field only
DBM_OFFSET_DB = -30.0
MIN_PATH_LOSS_EXPONENT = 1.5
MAX_PATH_LOSS_EXPONENT = 6.0

SeedLike = Union[int, np.random.SeedSequence]


class ChannelGeometryError(ValueError):
    """Degenerate scenario geometry or out-of-range channel parameters."""


@dataclass(frozen=True)
class ScenarioGeometry:
    d_bi: float
    d: float
    d_tilde: float
    d_v: float
    m_bs: int
    m_eve: int
    n_irs: int

    def __post_init__(self):
        for name in ("d_bi", "d", "d_tilde"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ChannelGeometryError(f"{name} must be a positive distance, got {value}")
        if not (math.isfinite(self.d_v) and self.d_v >= 0):
            raise ChannelGeometryError(f"d_v must be a non-negative distance, got {self.d_v}")
        for name in ("m_bs", "m_eve", "n_irs"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ChannelGeometryError(f"{name} must be an integer >= 1, got {value}")
        # Raises on any link shorter than MIN_LINK_DISTANCE
        self.link_distances()

    @property
    def positions(self) -> Dict[str, Tuple[float, float]]:
        return {
            "bs": (0.0, 0.0),
            "irs": (self.d_bi, 0.0),
            "bob": (self.d, self.d_v),
            "eve": (self.d_tilde, self.d_v),
        }

    def link_endpoints(self, link: Link) -> Tuple[str, str]:
        """(receive-side, transmit-side) node names of a channel block."""
        return {
            Link.TI: ("irs", "bs"),
            Link.TB: ("bs", "bob"),
            Link.TE: ("bs", "eve"),
            Link.IB: ("irs", "bob"),
            Link.IE: ("irs", "eve"),
        }[link]

    def link_distance(self, link: Link) -> float:
        a, b = self.link_endpoints(link)
        (xa, ya), (xb, yb) = self.positions[a], self.positions[b]
        return math.hypot(xb - xa, yb - ya)

    def link_distances(self) -> Dict[Link, float]:
        distances = {}
        for link in Link:
            distance = self.link_distance(link)
            if distance < MIN_LINK_DISTANCE:
                raise ChannelGeometryError(
                    f"{link.value.upper()} link distance {distance:.3f} m is below the "
                    f"{MIN_LINK_DISTANCE} m far-field minimum"
                )
            distances[link] = distance
        return distances

    def direction_sine(self, node: str, towards: str) -> float:
        """sin of the angle from broadside at `node` towards `towards`."""
        (x0, y0), (x1, y1) = self.positions[node], self.positions[towards]
        return (x1 - x0) / math.hypot(x1 - x0, y1 - y0)

    def array_size(self, node: str) -> int:
        return {"bs": self.m_bs, "irs": self.n_irs, "eve": self.m_eve, "bob": 1}[node]


@dataclass(frozen=True)
class PathLossParams:
    l0_db: float = -30.0
    zeta_ti: float = 2.2
    zeta_tb: float = 3.5
    zeta_te: float = 3.5
    zeta_ib: float = 2.5
    zeta_ie: float = 2.5

    def __post_init__(self):
        if not math.isfinite(self.l0_db):
            raise ChannelGeometryError(f"l0_db must be finite, got {self.l0_db}")
        for link in Link:
            zeta = self.exponent(link)
            if not (MIN_PATH_LOSS_EXPONENT <= zeta <= MAX_PATH_LOSS_EXPONENT):
                raise ChannelGeometryError(
                    f"Path-loss exponent for {link.value.upper()} must be in "
                    f"[{MIN_PATH_LOSS_EXPONENT}, {MAX_PATH_LOSS_EXPONENT}], got {zeta}"
                )

    def exponent(self, link: Link) -> float:
        return getattr(self, f"zeta_{link.value}")


@dataclass(frozen=True)
class RicianParams:
    k_ti: float = 10.0
    k_tb: float = 0.0
    k_te: float = 0.0
    k_ib: float = 10.0
    k_ie: float = 10.0

    def __post_init__(self):
        for link in Link:
            k = self.factor(link)
            if not (math.isfinite(k) and k >= 0):
                raise ChannelGeometryError(f"Rician factor for {link.value.upper()} must be finite and >= 0, got {k}")

    def factor(self, link: Link) -> float:
        return getattr(self, f"k_{link.value}")


@dataclass(frozen=True)
class ChannelSet:
    h_ti: np.ndarray  # N x M
    h_tb: np.ndarray  # M
    h_te: np.ndarray  # M x M'
    h_ib: np.ndarray  # N
    h_ie: np.ndarray  # N x M'

    def __post_init__(self):
        n, m = np.shape(self.h_ti)
        m_eve = np.shape(self.h_te)[1]
        expected = {
            "h_tb": (m,),
            "h_te": (m, m_eve),
            "h_ib": (n,),
            "h_ie": (n, m_eve),
        }
        for name, shape in expected.items():
            if np.shape(getattr(self, name)) != shape:
                raise ValueError(f"{name} has shape {np.shape(getattr(self, name))}, expected {shape}")
        for name in ("h_ti", "h_tb", "h_te", "h_ib", "h_ie"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains non-finite entries")

    @property
    def n_irs(self) -> int:
        return self.h_ti.shape[0]

    @property
    def m_bs(self) -> int:
        return self.h_ti.shape[1]

    @property
    def m_eve(self) -> int:
        return self.h_te.shape[1]

    def without_reflection(self) -> "ChannelSet":
        """Same realization with every IRS-reflected block zeroed."""
        return replace(
            self,
            h_ti=np.zeros_like(self.h_ti),
            h_ib=np.zeros_like(self.h_ib),
            h_ie=np.zeros_like(self.h_ie),
        )


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def dbm_to_watts(x_dbm: float) -> float:
    return db_to_linear(x_dbm + DBM_OFFSET_DB)


def path_gain(l0_db: float, distance: float, exponent: float) -> float:
    """Large-scale power gain L0 * d^-zeta."""
    if distance <= 0:
        raise ChannelGeometryError(f"Path gain needs a positive distance, got {distance}")
    return db_to_linear(l0_db) * distance ** (-exponent)


def ula_steering(n_elements: int, spatial_freq: float) -> np.ndarray:
    if n_elements < 1:
        raise ValueError(f"Steering vector needs at least one element, got {n_elements}")
    return np.exp(1j * spatial_freq * np.arange(n_elements))


def rician_matrix(
    rows: int,
    cols: int,
    k: float,
    gain: float,
    los_rx: np.ndarray,
    los_tx: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    if k < 0:
        raise ChannelGeometryError(f"Rician factor must be >= 0, got {k}")
    los_rx = np.asarray(los_rx, dtype=complex)
    los_tx = np.asarray(los_tx, dtype=complex)
    if los_rx.shape != (rows,) or los_tx.shape != (cols,):
        raise ValueError(
            f"LoS vectors of lengths {los_rx.shape}/{los_tx.shape} do not match a {rows}x{cols} block"
        )

    nlos = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / math.sqrt(2.0)
    los = np.outer(los_rx, los_tx.conj())
    return math.sqrt(gain) * (math.sqrt(k / (k + 1.0)) * los + math.sqrt(1.0 / (k + 1.0)) * nlos)


def substream(seed: SeedLike, offset: int) -> np.random.Generator:
    """Generator for a fixed child stream of `seed`, independent of sibling streams."""
    base = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    child = np.random.SeedSequence(entropy=base.entropy, spawn_key=tuple(base.spawn_key) + (offset,))
    return np.random.default_rng(child)


def generate_link(
    link: Link,
    geom: ScenarioGeometry,
    pl: PathLossParams,
    ric: RicianParams,
    rng: np.random.Generator,
) -> np.ndarray:
    rx, tx = geom.link_endpoints(link)
    rows, cols = geom.array_size(rx), geom.array_size(tx)
    los_rx = ula_steering(rows, math.pi * geom.direction_sine(rx, tx))
    los_tx = ula_steering(cols, math.pi * geom.direction_sine(tx, rx))
    gain = path_gain(pl.l0_db, geom.link_distance(link), pl.exponent(link))
    return rician_matrix(rows, cols, ric.factor(link), gain, los_rx, los_tx, rng)


def generate_channels(
    geom: ScenarioGeometry,
    pl: PathLossParams,
    ric: RicianParams,
    seed: SeedLike,
) -> ChannelSet:
    geom.link_distances()
    blocks = {
        link: generate_link(link, geom, pl, ric, substream(seed, LINK_STREAM_OFFSETS[link]))
        for link in Link
    }
    logger.debug(
        f"Generated channels M={geom.m_bs} M'={geom.m_eve} N={geom.n_irs} "
        f"(d={geom.d}, d_tilde={geom.d_tilde})"
    )
    return ChannelSet(
        h_ti=blocks[Link.TI],
        h_tb=blocks[Link.TB][:, 0],
        h_te=blocks[Link.TE],
        h_ib=blocks[Link.IB][:, 0],
        h_ie=blocks[Link.IE],
    )
