"""
Geometry and Channels
---------------------
Planar array layout, per-element propagation offsets, large-scale path loss and
the equivalent channel vectors h_br, h_ru together with the diagonal reflection
matrix Theta of the frequency-diverse surface.
"""

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

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

SPEED_OF_LIGHT = 299_792_458.0


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    if not watts > 0:
        raise ModelDomainError("Power must be positive", "NON_POSITIVE_POWER", {'watts': watts})
    return 10.0 * np.log10(watts) + 30.0


@dataclass(frozen=True)
class ArrayLayout:
    """M x N planar array with uniform element spacing d (meters)"""

    rows: int
    cols: int
    spacing: float

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ModelDomainError(
                "Array must have at least one row and one column",
                "INVALID_LAYOUT",
                {'rows': self.rows, 'cols': self.cols},
            )
        if not self.spacing > 0:
            raise ModelDomainError("Element spacing must be positive", "INVALID_LAYOUT", {'spacing': self.spacing})

    @property
    def total(self) -> int:
        return self.rows * self.cols

    def flat_index(self, m: int, n: int) -> int:
        """0-based position of element (m, n) in every per-element vector"""
        self._check_element(m, n)
        return (m - 1) * self.cols + (n - 1)

    def _check_element(self, m: int, n: int) -> None:
        if not (1 <= m <= self.rows and 1 <= n <= self.cols):
            raise ModelDomainError(
                "Element index out of range",
                "ELEMENT_OUT_OF_RANGE",
                {'m': m, 'n': n, 'rows': self.rows, 'cols': self.cols},
            )


@dataclass(frozen=True)
class Placement:
    """Position relative to the surface: distance (m), elevation and azimuth (rad)"""

    distance: float
    elevation: float
    azimuth: float

    def __post_init__(self):
        if not self.distance > 0:
            raise ModelDomainError(
                "Distance must be positive",
                "NON_POSITIVE_DISTANCE",
                {'distance': self.distance},
            )
        if not (np.isfinite(self.elevation) and np.isfinite(self.azimuth)):
            raise ModelDomainError("Angles must be finite", "INVALID_ANGLE")

    @classmethod
    def from_degrees(cls, distance: float, elevation_deg: float, azimuth_deg: float) -> "Placement":
        return cls(distance, float(np.deg2rad(elevation_deg)), float(np.deg2rad(azimuth_deg)))


@dataclass(frozen=True)
class LinkGeometry:
    layout: ArrayLayout
    bs: Placement
    user: Placement
    carrier: float
    light_speed: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if not self.carrier > 0:
            raise ModelDomainError("Carrier frequency must be positive", "INVALID_CARRIER", {'carrier': self.carrier})

    @property
    def wavelength(self) -> float:
        return self.light_speed / self.carrier

    def with_user(self, user: Placement) -> "LinkGeometry":
        return replace(self, user=user)


@dataclass(frozen=True, eq=False)
class ChannelPair:
    """Equivalent BS-surface and surface-user channels (carrier factor dropped)"""

    h_br: np.ndarray = field(repr=False)
    h_ru: np.ndarray = field(repr=False)
    tx_power: float
    noise_power: float

    def __post_init__(self):
        if self.h_br.shape != self.h_ru.shape or self.h_br.ndim != 1:
            raise ModelDomainError(
                "Channel vectors must share one length",
                "SHAPE_MISMATCH",
                {'h_br': list(self.h_br.shape), 'h_ru': list(self.h_ru.shape)},
            )
        if not (self.tx_power > 0 and self.noise_power > 0):
            raise ModelDomainError(
                "Transmit and noise powers must be positive",
                "NON_POSITIVE_POWER",
                {'tx_power': self.tx_power, 'noise_power': self.noise_power},
            )
        self.h_br.setflags(write=False)
        self.h_ru.setflags(write=False)

    @property
    def elements(self) -> int:
        return self.h_br.shape[0]

    @property
    def cascade(self) -> np.ndarray:
        """Per-element weights conj(h_br,s) * h_ru,s; gain = cascade @ theta"""
        return np.conj(self.h_br) * self.h_ru


@dataclass(frozen=True)
class EvaluationContext:
    """Instant t (s) at which the harmonic phase terms are evaluated"""

    obs_time: float

    def __post_init__(self):
        if not np.isfinite(self.obs_time):
            raise ModelDomainError("Observation time must be finite", "INVALID_OBS_TIME")

    @classmethod
    def default_for(cls, geometry: LinkGeometry) -> "EvaluationContext":
        """t = d_ru / c: the z-dependent phase reduces to exp(j 2pi z f0 Gamma_ru / c)"""
        return cls(geometry.user.distance / geometry.light_speed)


def element_offset(layout: ArrayLayout, m: int, n: int, placement: Placement) -> float:
    """Gamma^mn = (m - 1) d sin(theta) cos(phi) + (n - 1) d sin(theta) sin(phi)"""
    layout._check_element(m, n)
    s = np.sin(placement.elevation)
    return float(
        (m - 1) * layout.spacing * s * np.cos(placement.azimuth)
        + (n - 1) * layout.spacing * s * np.sin(placement.azimuth)
    )


def element_offsets(layout: ArrayLayout, placement: Placement) -> np.ndarray:
    """Gamma^mn for every element, flattened row-major (length S)"""
    m, n = np.meshgrid(np.arange(layout.rows), np.arange(layout.cols), indexing='ij')
    s = np.sin(placement.elevation)
    gamma = m * layout.spacing * s * np.cos(placement.azimuth) + n * layout.spacing * s * np.sin(placement.azimuth)
    return gamma.reshape(-1)


def path_loss_db(distance: float) -> float:
    """eta(d) = -30 - 22 log10(d) dB"""
    distance = np.asarray(distance, dtype=float)
    if np.any(distance <= 0):
        raise ModelDomainError(
            "Path loss needs a positive distance",
            "NON_POSITIVE_DISTANCE",
            {'distance': distance.tolist()},
        )
    return -30.0 - 22.0 * np.log10(distance)


def path_loss_amplitude(distance: float) -> float:
    """Amplitude gain 10^(eta_dB / 20); received energy scales with its square"""
    return 10.0 ** (path_loss_db(distance) / 20.0)


def _steering(geometry: LinkGeometry, placement: Placement) -> np.ndarray:
    per_element = placement.distance - element_offsets(geometry.layout, placement)
    return np.exp(-1j * 2 * np.pi * geometry.carrier * per_element / geometry.light_speed)


def build_channels(
    geometry: LinkGeometry,
    tx_power_dbm: float,
    noise_dbm: float,
    include_path_loss: bool = True,
) -> ChannelPair:
    """
    h_br,s = sqrt(P) eta(d_br) exp(-j 2pi f_c (d_br - Gamma_br^mn) / c)
    h_ru,s = eta(d_ru) exp(-j 2pi f_c (d_ru - Gamma_ru^mn) / c)

    With `include_path_loss` off both eta factors are 1 and sqrt(P) is kept.
    """
    tx_power = dbm_to_watts(tx_power_dbm)
    eta_br = path_loss_amplitude(geometry.bs.distance) if include_path_loss else 1.0
    eta_ru = path_loss_amplitude(geometry.user.distance) if include_path_loss else 1.0
    h_br = np.sqrt(tx_power) * eta_br * _steering(geometry, geometry.bs)
    h_ru = eta_ru * _steering(geometry, geometry.user)
    return ChannelPair(h_br, h_ru, tx_power, dbm_to_watts(noise_dbm))


def element_delays(geometry: LinkGeometry, user: Optional[Placement] = None) -> np.ndarray:
    """d_ru^mn / c for every element (s)"""
    user = user or geometry.user
    return (user.distance - element_offsets(geometry.layout, user)) / geometry.light_speed


def build_theta(
    codes: ReflectionCodes,
    alphabet: PhaseAlphabet,
    scheme: ModulationScheme,
    geometry: LinkGeometry,
    ctx: EvaluationContext,
    table: Optional[FourierTable] = None,
) -> np.ndarray:
    """Diagonal of Theta: theta_s for every element at ctx.obs_time"""
    if codes.elements != geometry.layout.total or codes.slots != scheme.slots:
        raise ModelDomainError(
            "Code matrix does not match the array layout or coding length",
            "SHAPE_MISMATCH",
            {
                'codes': [codes.elements, codes.slots],
                'expected': [geometry.layout.total, scheme.slots],
            },
        )
    table = table or build_fourier_table(scheme.slots, scheme.truncation)
    b = harmonic_phases(scheme, ctx.obs_time, element_delays(geometry))
    return np.sum(code_spectra(codes.codes, alphabet, table) * b, axis=-1)


def effective_gain(pair: ChannelPair, theta: np.ndarray) -> complex:
    """h_br^H Theta h_ru = sum_s conj(h_br,s) theta_s h_ru,s"""
    theta = np.asarray(theta)
    if theta.shape != pair.h_br.shape:
        raise ModelDomainError(
            "Reflection vector length does not match the channels",
            "SHAPE_MISMATCH",
            {'theta': list(theta.shape), 'channels': list(pair.h_br.shape)},
        )
    return complex(np.sum(pair.cascade * theta))
