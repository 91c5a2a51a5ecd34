"""
Beam Patterns and Link Metrics
------------------------------
Received-power surfaces over (distance, azimuth) grids, the exact quantized
phase-alignment solution of a conventional static surface, and rate helpers.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from src.models import PatternBlock
from src.services.geometry import (
    ChannelPair,
    EvaluationContext,
    LinkGeometry,
    Placement,
    build_channels,
    element_delays,
)
from src.services.signal_core import (
    FourierTable,
    ModulationScheme,
    PhaseAlphabet,
    ReflectionCodes,
    build_fourier_table,
    code_spectra,
    harmonic_phases,
)
from src.utils.exceptions import ModelDomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GridSpec:
    distances: np.ndarray
    azimuths: np.ndarray
    elevation: float = np.pi / 2

    def __post_init__(self):
        if not (len(self.distances) and len(self.azimuths)):
            raise ModelDomainError("Pattern grid must not be empty", "EMPTY_GRID")
        if np.any(np.asarray(self.distances) <= 0):
            raise ModelDomainError("Grid distances must be positive", "NON_POSITIVE_DISTANCE")

    @property
    def cells(self) -> int:
        return len(self.distances) * len(self.azimuths)

    @classmethod
    def from_block(cls, block: PatternBlock, elevation_deg: float = 90.0) -> "GridSpec":
        return cls(
            np.linspace(block.distance_min, block.distance_max, block.distance_points),
            np.deg2rad(np.linspace(block.azimuth_min_deg, block.azimuth_max_deg, block.azimuth_points)),
            float(np.deg2rad(elevation_deg)),
        )


@dataclass(frozen=True, eq=False)
class PatternGrid:
    """Received power (linear, W) for every (distance, azimuth) cell"""

    distances: np.ndarray = field(repr=False)
    azimuths: np.ndarray = field(repr=False)
    elevation: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.values.shape != (len(self.distances), len(self.azimuths)):
            raise ModelDomainError(
                "Pattern values do not match the grid axes",
                "SHAPE_MISMATCH",
                {'values': list(self.values.shape)},
            )
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise ModelDomainError("Pattern values must be finite and non-negative", "INVALID_PATTERN")

    def peak(self) -> Dict[str, float]:
        i, j = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return {
            'distance': float(self.distances[i]),
            'azimuth_deg': float(np.rad2deg(self.azimuths[j])),
            'power': float(self.values[i, j]),
        }

    def csv_rows(self) -> List[List[float]]:
        """Rows of (distance m, azimuth deg, power W), distance-major"""
        az_deg = np.rad2deg(self.azimuths)
        return [
            [float(d), float(a), float(self.values[i, j])]
            for i, d in enumerate(self.distances)
            for j, a in enumerate(az_deg)
        ]

    def to_dict(self) -> Dict[str, object]:
        return {
            'distances_m': [float(d) for d in self.distances],
            'azimuths_deg': [float(a) for a in np.rad2deg(self.azimuths)],
            'elevation_deg': float(np.rad2deg(self.elevation)),
            'values': [float(v) for v in self.values.reshape(-1)],
            'peak': self.peak(),
        }


@dataclass(frozen=True, eq=False)
class RisOracle:
    """Optimal quantized static assignment (0-based alphabet indices) and its gain"""

    indices: np.ndarray
    gain: complex
    levels: int

    @property
    def codes(self) -> ReflectionCodes:
        return ReflectionCodes(self.indices[:, None], self.levels)


def rate_from_gain(gain: complex, noise_watts: float) -> float:
    """log2(1 + |gain|^2 / sigma^2)"""
    if not noise_watts > 0:
        raise ModelDomainError("Noise power must be positive", "NON_POSITIVE_POWER", {'noise': noise_watts})
    return float(np.log2(1.0 + np.abs(gain) ** 2 / noise_watts))


def static_gain(pair: ChannelPair, alphabet: PhaseAlphabet, indices: np.ndarray) -> complex:
    """Gain of a conventional surface with one fixed alphabet phase per element"""
    return complex(np.sum(pair.cascade * alphabet.phases(indices)))


def ris_quantized_oracle(pair: ChannelPair, alphabet: PhaseAlphabet) -> RisOracle:
    """
    Maximize |sum_s w_s phi_{q_s}| with w_s = conj(h_br,s) h_ru,s.

    At the optimum every element sits on the alphabet phase nearest to a common
    direction psi, so only the assignments induced by some psi compete. Sweeping
    psi once around the circle crosses S * Q switching points; each switch moves
    one element to its next phase, so a cumulative sum visits all of them.
    """
    w = pair.cascade
    q = alphabet.size
    alpha = np.angle(w)
    step = 2 * np.pi / q
    # chosen phase number k + 1 = round((psi - alpha_s) / step) at psi = 0
    start = np.rint(-alpha / step).astype(np.int64) % q
    base = np.sum(w * np.exp(1j * step * start))

    j = np.arange(q)
    switch = np.mod(alpha[:, None] + step * (j[None, :] + 0.5), 2 * np.pi).reshape(-1)
    delta = (w[:, None] * (np.exp(1j * step * (j + 1)) - np.exp(1j * step * j))[None, :]).reshape(-1)
    order = np.argsort(switch, kind='stable')
    sums = np.concatenate([[base], base + np.cumsum(delta[order])])
    best = int(np.argmax(np.abs(sums)))

    phase_number = start.copy()
    if best:
        applied = order[:best][::-1]
        elems, first = np.unique(applied // q, return_index=True)
        phase_number[elems] = (applied[first] % q + 1) % q
    indices = (phase_number - 1) % q
    gain = static_gain(pair, alphabet, indices)
    logger.debug(f"Quantized alignment over {len(switch)} switching points: |gain| = {abs(gain):.6e}")
    return RisOracle(indices, gain, q)


def beam_pattern(
    codes: ReflectionCodes,
    alphabet: PhaseAlphabet,
    scheme: ModulationScheme,
    geometry: LinkGeometry,
    grid: GridSpec,
    tx_power_dbm: float,
    include_path_loss: bool = True,
    ctx: Optional[EvaluationContext] = None,
    table: Optional[FourierTable] = None,
) -> PatternGrid:
    """
    |sum_s conj(h_br,s) theta_s(d, phi) h_ru,s(d, phi)|^2 over the grid at a fixed
    instant. `geometry.user` is the design target; the default instant is its d_ru / c.
    """
    if codes.elements != geometry.layout.total or codes.slots != scheme.slots:
        raise ModelDomainError(
            "Code matrix does not match the array layout or coding length",
            "SHAPE_MISMATCH",
            {'codes': [codes.elements, codes.slots], 'expected': [geometry.layout.total, scheme.slots]},
        )
    ctx = ctx or EvaluationContext.default_for(geometry)
    table = table or build_fourier_table(scheme.slots, scheme.truncation)
    spectra = code_spectra(codes.codes, alphabet, table)
    # the BS side is fixed; h_br does not depend on the observation cell
    h_br = build_channels(geometry, tx_power_dbm, 0.0, include_path_loss).h_br

    values = np.empty((len(grid.distances), len(grid.azimuths)))
    for i, d in enumerate(grid.distances):
        for j, phi in enumerate(grid.azimuths):
            cell = geometry.with_user(Placement(float(d), grid.elevation, float(phi)))
            h_ru = build_channels(cell, tx_power_dbm, 0.0, include_path_loss).h_ru
            b = harmonic_phases(scheme, ctx.obs_time, element_delays(cell))
            theta = np.sum(spectra * b, axis=-1)
            values[i, j] = np.abs(np.sum(np.conj(h_br) * theta * h_ru)) ** 2
    return PatternGrid(np.asarray(grid.distances, dtype=float), np.asarray(grid.azimuths, dtype=float), grid.elevation, values)


def target_power(
    codes: ReflectionCodes,
    alphabet: PhaseAlphabet,
    scheme: ModulationScheme,
    geometry: LinkGeometry,
    tx_power_dbm: float,
    include_path_loss: bool = True,
    ctx: Optional[EvaluationContext] = None,
) -> float:
    """Received power exactly at the design target `geometry.user`"""
    user = geometry.user
    grid = GridSpec(np.array([user.distance]), np.array([user.azimuth]), user.elevation)
    pattern = beam_pattern(codes, alphabet, scheme, geometry, grid, tx_power_dbm, include_path_loss, ctx)
    return float(pattern.values[0, 0])
