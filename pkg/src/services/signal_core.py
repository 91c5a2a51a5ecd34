"""
Time-Modulation Signal Core
---------------------------
Square-wave time coding of the surface elements and its truncated harmonic
expansion. Every element switches among L phase slots of length tau = T0 / L;
the reflected signal is kept up to harmonic order Z, and the in-band response of
element s at the evaluation instant collapses to one complex coefficient theta_s.

Code matrices are stored as 0-based alphabet indices: index k selects the phase
exp(j * 2pi * (k + 1) / Q), i.e. the alphabet member q = k + 1.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from src.utils.exceptions import ModelDomainError

ArrayLike = Union[np.ndarray, Sequence[int]]


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def sinc(x: np.ndarray) -> np.ndarray:
    """Unnormalized sinc, sin(x) / x, equal to 1 at x = 0"""
    # np.sinc is the normalized form sin(pi x) / (pi x) and handles the origin
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


@dataclass(frozen=True, eq=False)
class PhaseAlphabet:
    """The 2^b unit-modulus phases available to each reflection coefficient"""

    bits: int
    values: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.bits < 1:
            raise ModelDomainError(
                "Phase resolution must be at least one bit",
                "INVALID_BITS",
                {'bits': self.bits},
            )
        q = np.arange(1, 2 ** self.bits + 1)
        object.__setattr__(self, 'values', _frozen(np.exp(1j * 2 * np.pi * q / 2 ** self.bits)))

    @property
    def size(self) -> int:
        return 2 ** self.bits

    def phases(self, indices: ArrayLike) -> np.ndarray:
        """Map alphabet indices (any shape) to their complex phases"""
        idx = np.asarray(indices)
        if idx.size and (not np.issubdtype(idx.dtype, np.integer) or idx.min() < 0 or idx.max() >= self.size):
            raise ModelDomainError(
                "Code entries must index the phase alphabet",
                "INVALID_CODE_INDEX",
                {'alphabet_size': self.size},
            )
        return self.values[idx]

    def nearest(self, angles: np.ndarray) -> np.ndarray:
        """Index of the alphabet phase closest to each angle (radians)"""
        steps = np.rint(np.asarray(angles) * self.size / (2 * np.pi)).astype(np.int64)
        return (steps - 1) % self.size


@dataclass(frozen=True)
class ModulationScheme:
    """Periodic square-wave time coding: L slots per period T0 = 1 / f0"""

    slots: int
    mod_freq: float
    truncation: int

    def __post_init__(self):
        if self.slots < 1:
            raise ModelDomainError("Coding length must be positive", "INVALID_SLOTS", {'slots': self.slots})
        if not self.mod_freq > 0:
            raise ModelDomainError(
                "Modulation frequency must be positive",
                "INVALID_MOD_FREQ",
                {'mod_freq': self.mod_freq},
            )
        if self.truncation < 0:
            raise ModelDomainError(
                "Truncation order must be non-negative",
                "INVALID_TRUNCATION",
                {'truncation': self.truncation},
            )

    @property
    def period(self) -> float:
        return 1.0 / self.mod_freq

    @property
    def slot_len(self) -> float:
        return self.period / self.slots

    @property
    def is_static(self) -> bool:
        """A single slot per period is the conventional (static) surface"""
        return self.slots == 1

    def harmonic_orders(self) -> np.ndarray:
        return np.arange(-self.truncation, self.truncation + 1)


@dataclass(frozen=True, eq=False)
class FourierTable:
    """Fourier coefficients a_lz; entry (l - 1, z + Z) holds slot l, order z"""

    slots: int
    truncation: int
    coeffs: np.ndarray = field(repr=False)

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.truncation, self.truncation + 1)

    def column(self, z: int) -> np.ndarray:
        if abs(z) > self.truncation:
            raise ModelDomainError(
                "Harmonic order outside the truncated band",
                "ORDER_OUT_OF_BAND",
                {'z': z, 'truncation': self.truncation},
            )
        return self.coeffs[:, z + self.truncation]


@dataclass(frozen=True, eq=False)
class ReflectionCodes:
    """S x L matrix of alphabet indices; row s is element s = (m - 1) N + n"""

    codes: np.ndarray
    levels: int

    def __post_init__(self):
        codes = np.array(self.codes, dtype=np.int64)
        if codes.ndim != 2:
            raise ModelDomainError(
                "Reflection codes must be an S x L matrix",
                "SHAPE_MISMATCH",
                {'shape': list(codes.shape)},
            )
        if codes.size and (codes.min() < 0 or codes.max() >= self.levels):
            raise ModelDomainError(
                "Code entries must index the phase alphabet",
                "INVALID_CODE_INDEX",
                {'alphabet_size': self.levels},
            )
        object.__setattr__(self, 'codes', _frozen(codes))

    @property
    def elements(self) -> int:
        return self.codes.shape[0]

    @property
    def slots(self) -> int:
        return self.codes.shape[1]

    def flatten(self) -> np.ndarray:
        """The stacked vector gamma of length P = S * L, element-major"""
        return self.codes.reshape(-1).copy()

    @classmethod
    def from_flat(cls, gamma: ArrayLike, slots: int, levels: int) -> "ReflectionCodes":
        gamma = np.asarray(gamma)
        if slots < 1 or gamma.size % slots:
            raise ModelDomainError(
                "Code vector length is not a multiple of the coding length",
                "SHAPE_MISMATCH",
                {'length': int(gamma.size), 'slots': slots},
            )
        return cls(gamma.reshape(-1, slots), levels)

    def to_symbols(self) -> list:
        """1-based alphabet members q, as persisted in run records"""
        return (self.codes + 1).tolist()

    @classmethod
    def from_symbols(cls, symbols: Sequence[Sequence[int]], levels: int) -> "ReflectionCodes":
        return cls(np.asarray(symbols, dtype=np.int64) - 1, levels)

    @classmethod
    def constant(cls, elements: int, slots: int, index: int, levels: int) -> "ReflectionCodes":
        return cls(np.full((elements, slots), index, dtype=np.int64), levels)


def fourier_coefficient(l: int, z: int, slots: int) -> complex:
    """
    Fourier coefficient of order z of the slot-l square wave V(t - (l - 1) tau).

        a_lz = exp(-j 2pi z (l - 1) / L) * (1 / L) * sinc(pi z / L) * exp(-j pi z / L)
    """
    if slots < 1 or not 1 <= l <= slots:
        raise ModelDomainError(
            "Slot index out of range",
            "SLOT_OUT_OF_RANGE",
            {'l': l, 'slots': slots},
        )
    if z == 0:
        return complex(1.0 / slots)
    shift = np.exp(-1j * 2 * np.pi * z * (l - 1) / slots)
    return complex(shift * sinc(np.pi * z / slots) * np.exp(-1j * np.pi * z / slots) / slots)


@lru_cache(maxsize=64)
def build_fourier_table(slots: int, truncation: int) -> FourierTable:
    """Materialize a_lz for all slots and orders |z| <= Z (identical for every element)"""
    if slots < 1 or truncation < 0:
        raise ModelDomainError(
            "Coding length must be positive and truncation non-negative",
            "INVALID_TABLE_SHAPE",
            {'slots': slots, 'truncation': truncation},
        )
    l = np.arange(1, slots + 1)[:, None]
    z = np.arange(-truncation, truncation + 1)[None, :]
    coeffs = (
        np.exp(-1j * 2 * np.pi * z * (l - 1) / slots)
        * sinc(np.pi * z / slots)
        * np.exp(-1j * np.pi * z / slots)
        / slots
    )
    # the center column is 1/L by definition; avoid rounding in the phase factors
    coeffs[:, truncation] = 1.0 / slots
    return FourierTable(slots, truncation, _frozen(coeffs))


def _check_row(codes_row: np.ndarray, table: FourierTable) -> None:
    if codes_row.shape[-1] != table.slots:
        raise ModelDomainError(
            "Code row length does not match the Fourier table",
            "SHAPE_MISMATCH",
            {'row_length': int(codes_row.shape[-1]), 'slots': table.slots},
        )


def element_code_spectrum(codes_row: ArrayLike, alphabet: PhaseAlphabet, table: FourierTable) -> np.ndarray:
    """Harmonic content c_z = sum_l Upsilon^l a_lz of one element's code (length 2Z + 1)"""
    row = np.asarray(codes_row)
    _check_row(row, table)
    return alphabet.phases(row) @ table.coeffs


def code_spectra(codes: ArrayLike, alphabet: PhaseAlphabet, table: FourierTable) -> np.ndarray:
    """element_code_spectrum over any leading batch shape: (..., S, L) -> (..., S, 2Z + 1)"""
    codes = np.asarray(codes)
    _check_row(codes, table)
    return alphabet.phases(codes) @ table.coeffs


def harmonic_phases(scheme: ModulationScheme, obs_time: float, element_delay: ArrayLike) -> np.ndarray:
    """
    b_s = [exp(j 2pi z f0 (t - d_ru^mn / c))] for z = -Z..Z.

    `element_delay` is d_ru^mn / c in seconds; a vector of delays yields one row per element.
    """
    delay = np.asarray(element_delay, dtype=float)
    z = scheme.harmonic_orders()
    return np.exp(1j * 2 * np.pi * scheme.mod_freq * np.multiply.outer(obs_time - delay, z))


def equivalent_theta(
    codes_row: ArrayLike,
    alphabet: PhaseAlphabet,
    table: FourierTable,
    harmonic_phases: ArrayLike,
) -> complex:
    """theta_s = gamma_s^T A_s b_s, the element's in-band reflection coefficient"""
    b = np.asarray(harmonic_phases)
    if b.shape != (2 * table.truncation + 1,):
        raise ModelDomainError(
            "Harmonic phase vector must have length 2Z + 1",
            "SHAPE_MISMATCH",
            {'length': list(b.shape), 'truncation': table.truncation},
        )
    return complex(element_code_spectrum(codes_row, alphabet, table) @ b)
