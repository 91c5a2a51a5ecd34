"""
Scenario and Record Models
--------------------------
Pydantic schemas for scenario files (one file fully determines a run) and for the
persisted run records. Defaults reproduce the reference link: Z = 3, L = 7,
f_c = 28 GHz, f0 in [100, 280] kHz, b = 2, noise -110 dBm, smoothing 0.65, d_br = 30 m.
"""

import math
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class _Block(BaseModel):
    model_config = ConfigDict(extra='forbid')


class PlacementBlock(_Block):
    distance: float = Field(gt=0, description="meters")
    elevation_deg: float = 90.0
    azimuth_deg: float = 0.0


class GeometryBlock(_Block):
    rows: int = Field(default=10, ge=1)
    cols: int = Field(default=10, ge=1)
    # None selects half the carrier wavelength
    spacing: Optional[float] = Field(default=None, gt=0)
    carrier_hz: float = Field(default=28e9, gt=0)
    bs: PlacementBlock = Field(default_factory=lambda: PlacementBlock(distance=30.0))
    user: PlacementBlock = Field(
        default_factory=lambda: PlacementBlock(distance=150.0, elevation_deg=90.0, azimuth_deg=30.0)
    )

    @property
    def elements(self) -> int:
        return self.rows * self.cols


class ModulationBlock(_Block):
    slots: int = Field(default=7, ge=1)
    truncation: int = Field(default=3, ge=0)
    bits: int = Field(default=2, ge=1, le=16)
    freq_min_hz: float = Field(default=100e3, gt=0)
    freq_max_hz: float = Field(default=280e3, gt=0)

    @model_validator(mode='after')
    def _check_bounds(self):
        if self.freq_min_hz > self.freq_max_hz:
            raise ValueError(
                f"freq_min_hz ({self.freq_min_hz}) must not exceed freq_max_hz ({self.freq_max_hz})"
            )
        return self


class PowerBlock(_Block):
    tx_power_dbm: float = 30.0
    noise_dbm: float = -110.0


class CeoBlock(_Block):
    pop_size: int = Field(default=200, ge=1)
    elite_frac: float = Field(default=0.1, gt=0, lt=1)
    smoothing: float = Field(default=0.65, ge=0, le=1)
    max_iters: int = Field(default=500, ge=1)
    stall_iters: int = Field(default=5, ge=1)
    stall_tol: float = Field(default=1e-4, ge=0)

    @model_validator(mode='after')
    def _check_elite(self):
        if math.ceil(self.elite_frac * self.pop_size - 1e-9) < 1:
            raise ValueError("elite_frac * pop_size must leave at least one elite sample")
        return self


class GaBlock(_Block):
    pop_size: int = Field(default=200, ge=2)
    generations: int = Field(default=500, ge=0)
    tournament_size: int = Field(default=4, ge=1)
    crossover_rate: float = Field(default=0.9, ge=0, le=1)
    # None selects 1 / P per gene
    mutation_rate_discrete: Optional[float] = Field(default=None, ge=0, le=1)
    # None selects 5% of the frequency range
    mutation_sigma_freq: Optional[float] = Field(default=None, ge=0)
    elitism_count: int = Field(default=2, ge=0)

    @model_validator(mode='after')
    def _check_sizes(self):
        if self.elitism_count > self.pop_size:
            raise ValueError("elitism_count must not exceed pop_size")
        if self.tournament_size > self.pop_size:
            raise ValueError("tournament_size must not exceed pop_size")
        return self


class OptimizerBlock(_Block):
    method: Literal['ceo', 'ga'] = 'ceo'
    ceo: CeoBlock = Field(default_factory=CeoBlock)
    ga: GaBlock = Field(default_factory=GaBlock)


class EvaluationBlock(_Block):
    mode: Literal['instant', 'time_averaged'] = 'instant'
    # None selects t = d_ru / c
    obs_time_s: Optional[float] = None
    samples: int = Field(default=64, ge=2)


class PatternBlock(_Block):
    distance_min: float = Field(default=50.0, gt=0)
    distance_max: float = Field(default=300.0, gt=0)
    distance_points: int = Field(default=101, ge=1)
    azimuth_min_deg: float = -90.0
    azimuth_max_deg: float = 90.0
    azimuth_points: int = Field(default=181, ge=1)
    include_path_loss: bool = True

    @model_validator(mode='after')
    def _check_axes(self):
        if self.distance_min > self.distance_max:
            raise ValueError("distance_min must not exceed distance_max")
        if self.azimuth_min_deg > self.azimuth_max_deg:
            raise ValueError("azimuth_min_deg must not exceed azimuth_max_deg")
        return self


class ScenarioConfig(_Block):
    geometry: GeometryBlock = Field(default_factory=GeometryBlock)
    modulation: ModulationBlock = Field(default_factory=ModulationBlock)
    power: PowerBlock = Field(default_factory=PowerBlock)
    optimizer: OptimizerBlock = Field(default_factory=OptimizerBlock)
    evaluation: EvaluationBlock = Field(default_factory=EvaluationBlock)
    pattern: PatternBlock = Field(default_factory=PatternBlock)
    seed: int = Field(default=0, ge=0)

    @property
    def is_conventional(self) -> bool:
        return self.modulation.slots == 1

    def conventional(self) -> "ScenarioConfig":
        """The same scenario on a static surface (one slot per period)"""
        return self.model_copy(update={'modulation': self.modulation.model_copy(update={'slots': 1})})


class IterationEntry(BaseModel):
    iteration: int
    best_rate: float
    iteration_best_rate: float
    mean_elite_rate: float
    mod_freq_mean: float
    mod_freq_std: float
    mean_entropy_bits: float


class RunRecord(BaseModel):
    tool_version: str
    method: Literal['ceo', 'ga']
    seed: int
    config_hash: str
    config: ScenarioConfig
    best_rate: float
    best_mod_freq_hz: float
    # 1-based alphabet members q, one row per element
    best_codes: List[List[int]]
    iterations: int
    evaluations: int
    history: List[IterationEntry]
    # kept out of the persisted JSON so identical inputs give identical files
    wall_time_s: Optional[float] = Field(default=None, exclude=True)


class PatternRequest(_Block):
    """Body of a pattern request: a run record plus optional grid overrides"""

    record: RunRecord
    # None keeps the record's own pattern block
    pattern: Optional[PatternBlock] = None
    include_path_loss: Optional[bool] = None
