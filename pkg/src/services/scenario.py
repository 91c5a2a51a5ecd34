"""
Scenario Evaluation
-------------------
Resolves a ScenarioConfig into channels, Fourier table and alphabet once, then
evaluates batches of (codes, f0) candidates. Both optimizers score candidates here.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid

from src.models import ScenarioConfig
from src.services.geometry import (
    ArrayLayout,
    ChannelPair,
    EvaluationContext,
    LinkGeometry,
    Placement,
    build_channels,
    element_delays,
)
from src.services.signal_core import (
    FourierTable,
    PhaseAlphabet,
    build_fourier_table,
    code_spectra,
)
from src.utils.exceptions import ModelDomainError

logger = logging.getLogger(__name__)

# exhaustive enumeration refuses larger code spaces
MAX_EXHAUSTIVE_CODES = 1 << 20


def build_geometry(cfg: ScenarioConfig) -> LinkGeometry:
    geo = cfg.geometry
    unit_layout = LinkGeometry(
        ArrayLayout(geo.rows, geo.cols, 1.0),
        Placement.from_degrees(geo.bs.distance, geo.bs.elevation_deg, geo.bs.azimuth_deg),
        Placement.from_degrees(geo.user.distance, geo.user.elevation_deg, geo.user.azimuth_deg),
        geo.carrier_hz,
    )
    spacing = geo.spacing if geo.spacing is not None else unit_layout.wavelength / 2
    return LinkGeometry(
        ArrayLayout(geo.rows, geo.cols, spacing),
        unit_layout.bs,
        unit_layout.user,
        unit_layout.carrier,
    )


def rate_from_snr(snr: np.ndarray) -> np.ndarray:
    return np.log2(1.0 + snr)


@dataclass(frozen=True, eq=False)
class Scenario:
    config: ScenarioConfig = field(repr=False)
    geometry: LinkGeometry
    alphabet: PhaseAlphabet
    table: FourierTable = field(repr=False)
    pair: ChannelPair = field(repr=False)
    ctx: EvaluationContext
    freq_bounds: Tuple[float, float]
    time_averaged: bool = False
    samples: int = 64
    # worker threads sharing each candidate batch
    threads: int = 1
    # conj(h_br,s) h_ru,s and d_ru^mn / c per element
    cascade: np.ndarray = field(init=False, repr=False)
    delays: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        cascade = self.pair.cascade
        delays = element_delays(self.geometry)
        cascade.setflags(write=False)
        delays.setflags(write=False)
        object.__setattr__(self, 'cascade', cascade)
        object.__setattr__(self, 'delays', delays)

    @classmethod
    def from_config(cls, cfg: ScenarioConfig, threads: int = 1) -> "Scenario":
        geometry = build_geometry(cfg)
        mod = cfg.modulation
        ctx = (
            EvaluationContext(cfg.evaluation.obs_time_s)
            if cfg.evaluation.obs_time_s is not None
            else EvaluationContext.default_for(geometry)
        )
        return cls(
            config=cfg,
            geometry=geometry,
            alphabet=PhaseAlphabet(mod.bits),
            table=build_fourier_table(mod.slots, mod.truncation),
            pair=build_channels(geometry, cfg.power.tx_power_dbm, cfg.power.noise_dbm),
            ctx=ctx,
            freq_bounds=(mod.freq_min_hz, mod.freq_max_hz),
            time_averaged=cfg.evaluation.mode == 'time_averaged',
            samples=cfg.evaluation.samples,
            threads=max(1, threads),
        )

    @property
    def elements(self) -> int:
        return self.geometry.layout.total

    @property
    def slots(self) -> int:
        return self.table.slots

    @property
    def code_shape(self) -> Tuple[int, int]:
        return self.elements, self.slots

    @property
    def noise_power(self) -> float:
        return self.pair.noise_power

    def conventional(self) -> "Scenario":
        return Scenario.from_config(self.config.conventional(), self.threads)

    def _check_batch(self, codes: np.ndarray, freqs: np.ndarray) -> None:
        if codes.ndim != 3 or codes.shape[1:] != self.code_shape or freqs.shape != codes.shape[:1]:
            raise ModelDomainError(
                "Candidate batch does not match the scenario",
                "SHAPE_MISMATCH",
                {
                    'codes': list(codes.shape),
                    'freqs': list(freqs.shape),
                    'expected_codes': [-1, *self.code_shape],
                },
            )

    def gains(self, codes: np.ndarray, freqs: np.ndarray, obs_time: Optional[float] = None) -> np.ndarray:
        """h_br^H Theta h_ru for a batch: codes (K, S, L), freqs (K,) -> complex (K,)"""
        codes = np.asarray(codes)
        freqs = np.asarray(freqs, dtype=float)
        self._check_batch(codes, freqs)
        t = self.ctx.obs_time if obs_time is None else obs_time
        spectra = code_spectra(codes, self.alphabet, self.table)
        return self._gains_from_spectra(spectra, freqs, t)

    def _gains_from_spectra(self, spectra: np.ndarray, freqs: np.ndarray, t) -> np.ndarray:
        z = self.table.orders
        # phase argument (K, S, 2Z + 1); t may be per-candidate
        lag = np.reshape(t, (-1, 1)) - self.delays[None, :]
        b = np.exp(1j * 2 * np.pi * freqs[:, None, None] * lag[:, :, None] * z[None, None, :])
        theta = np.sum(spectra * b, axis=-1)
        return theta @ self.cascade

    def received_power(self, codes: np.ndarray, freqs: np.ndarray) -> np.ndarray:
        """|gain|^2 at the evaluation instant, or its mean over one modulation period"""
        codes = np.asarray(codes)
        freqs = np.asarray(freqs, dtype=float)
        self._check_batch(codes, freqs)
        if self.threads > 1 and len(codes) > 1:
            parts = [p for p in np.array_split(np.arange(len(codes)), self.threads) if p.size]
            with ThreadPoolExecutor(max_workers=len(parts)) as pool:
                blocks = list(pool.map(lambda idx: self._received_power(codes[idx], freqs[idx]), parts))
            return np.concatenate(blocks)
        return self._received_power(codes, freqs)

    def _received_power(self, codes: np.ndarray, freqs: np.ndarray) -> np.ndarray:
        spectra = code_spectra(codes, self.alphabet, self.table)
        if not self.time_averaged:
            return np.abs(self._gains_from_spectra(spectra, freqs, self.ctx.obs_time)) ** 2
        fractions = np.linspace(0.0, 1.0, self.samples + 1)
        powers = np.stack([
            np.abs(self._gains_from_spectra(spectra, freqs, self.ctx.obs_time + u / freqs)) ** 2
            for u in fractions
        ])
        return trapezoid(powers, fractions, axis=0)

    def rates(self, codes: np.ndarray, freqs: np.ndarray) -> np.ndarray:
        """R = log2(1 + |h_br^H Theta h_ru|^2 / sigma^2) per candidate"""
        return rate_from_snr(self.received_power(codes, freqs) / self.noise_power)

    def received_energy(self, codes: np.ndarray, freqs: np.ndarray) -> np.ndarray:
        """|y|^2 = |gain|^2 + sigma^2"""
        return self.received_power(codes, freqs) + self.noise_power


@dataclass(frozen=True)
class ExhaustiveResult:
    codes: np.ndarray
    mod_freq: float
    rate: float
    evaluated: int


def exhaustive_optimum(scenario: Scenario, freqs: np.ndarray, chunk: int = 4096) -> ExhaustiveResult:
    """Best rate over every code matrix and every frequency in `freqs` (small instances)"""
    freqs = np.asarray(freqs, dtype=float)
    q = scenario.alphabet.size
    positions = scenario.elements * scenario.slots
    total = q ** positions
    if total > MAX_EXHAUSTIVE_CODES:
        raise ModelDomainError(
            "Code space too large for exhaustive search",
            "SEARCH_SPACE_TOO_LARGE",
            {'codes': total, 'limit': MAX_EXHAUSTIVE_CODES},
        )
    best = (-np.inf, None, None)
    combos = itertools.product(range(q), repeat=positions)
    while True:
        block = np.array(list(itertools.islice(combos, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        codes = block.reshape(-1, *scenario.code_shape)
        for f0 in freqs:
            rates = scenario.rates(codes, np.full(len(codes), f0))
            k = int(np.argmax(rates))
            if rates[k] > best[0]:
                best = (float(rates[k]), codes[k].copy(), float(f0))
    logger.debug(f"Exhaustive search over {total} codes x {len(freqs)} frequencies: {best[0]:.6f}")
    return ExhaustiveResult(best[1], best[2], best[0], total * len(freqs))
