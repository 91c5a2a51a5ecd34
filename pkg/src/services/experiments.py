"""
Experiment Orchestration
------------------------
Single optimization runs, beam-pattern comparisons between run records, and
parameter sweeps over the element count, transmit power or phase resolution.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.models import IterationEntry, PlacementBlock, RunRecord, ScenarioConfig
from src.services import ceo_optimizer, ga_baseline
from src.services.geometry import EvaluationContext, LinkGeometry
from src.services.pattern_metrics import (
    GridSpec,
    PatternGrid,
    beam_pattern,
    rate_from_gain,
    ris_quantized_oracle,
    target_power,
)
from src.services.scenario import Scenario, build_geometry
from src.services.signal_core import ModulationScheme, PhaseAlphabet, ReflectionCodes
from src.utils.config import TOOL_VERSION
from src.utils.exceptions import ConfigError, FdRisError
from src.utils.records import config_hash
from src.utils.validation import user_label, validate_scenario, validate_sweep_axis

logger = logging.getLogger(__name__)

# rate gained per dB of transmit power at high SNR
HIGH_SNR_SLOPE = math.log2(10.0) / 10.0


@dataclass(frozen=True)
class Outcome:
    method: str
    codes: ReflectionCodes
    mod_freq: float
    rate: float
    history: Tuple[ceo_optimizer.IterationRecord, ...]
    iterations: int
    evaluations: int


def optimize(scenario: Scenario, method: Optional[str] = None) -> Outcome:
    method = method or scenario.config.optimizer.method
    if method == 'ceo':
        state = ceo_optimizer.run(scenario)
        best = state.best
        return Outcome('ceo', best.codes, best.mod_freq, best.objective, state.history, state.iteration, state.evaluations)
    if method == 'ga':
        result = ga_baseline.ga_run(scenario)
        best = result.best
        return Outcome('ga', best.codes, best.mod_freq, best.objective, result.history, result.generations, result.evaluations)
    raise FdRisError(f"Unknown optimizer '{method}'", "UNKNOWN_METHOD", {'method': method})


def run_optimization(cfg: ScenarioConfig, threads: int = 1) -> RunRecord:
    """Optimize the scenario with its configured method and package the result"""
    started = time.perf_counter()
    outcome = optimize(Scenario.from_config(cfg, threads))
    wall = time.perf_counter() - started
    logger.info(f"{outcome.method.upper()} run (seed {cfg.seed}) reached {outcome.rate:.6f} bit/s/Hz in {wall:.2f} s")
    return RunRecord(
        tool_version=TOOL_VERSION,
        method=outcome.method,
        seed=cfg.seed,
        config_hash=config_hash(cfg),
        config=cfg,
        best_rate=outcome.rate,
        best_mod_freq_hz=outcome.mod_freq,
        best_codes=outcome.codes.to_symbols(),
        iterations=outcome.iterations,
        evaluations=outcome.evaluations,
        history=[IterationEntry(**vars(h)) for h in outcome.history],
        wall_time_s=wall,
    )


@dataclass(frozen=True)
class RecordDesign:
    """Everything needed to re-evaluate the optimized surface of a run record"""

    codes: ReflectionCodes
    alphabet: PhaseAlphabet
    scheme: ModulationScheme
    geometry: LinkGeometry
    ctx: EvaluationContext
    tx_power_dbm: float

    @classmethod
    def from_record(cls, record: RunRecord) -> "RecordDesign":
        cfg = record.config
        alphabet = PhaseAlphabet(cfg.modulation.bits)
        geometry = build_geometry(cfg)
        ctx = (
            EvaluationContext(cfg.evaluation.obs_time_s)
            if cfg.evaluation.obs_time_s is not None
            else EvaluationContext.default_for(geometry)
        )
        return cls(
            codes=ReflectionCodes.from_symbols(record.best_codes, alphabet.size),
            alphabet=alphabet,
            scheme=ModulationScheme(cfg.modulation.slots, record.best_mod_freq_hz, cfg.modulation.truncation),
            geometry=geometry,
            ctx=ctx,
            tx_power_dbm=cfg.power.tx_power_dbm,
        )

    def pattern(self, grid: GridSpec, include_path_loss: bool, threads: int = 1) -> PatternGrid:
        """Pattern over `grid`; with several threads each one takes a band of distances"""
        bands = [b for b in np.array_split(np.asarray(grid.distances, dtype=float), max(1, threads)) if b.size]
        if len(bands) == 1:
            return self._pattern(grid, include_path_loss)
        with ThreadPoolExecutor(max_workers=len(bands)) as pool:
            parts = list(pool.map(
                lambda band: self._pattern(GridSpec(band, grid.azimuths, grid.elevation), include_path_loss),
                bands,
            ))
        return PatternGrid(
            np.asarray(grid.distances, dtype=float), np.asarray(grid.azimuths, dtype=float), grid.elevation,
            np.vstack([p.values for p in parts]),
        )

    def _pattern(self, grid: GridSpec, include_path_loss: bool) -> PatternGrid:
        return beam_pattern(
            self.codes, self.alphabet, self.scheme, self.geometry, grid,
            self.tx_power_dbm, include_path_loss, self.ctx,
        )

    def target_power(self, include_path_loss: bool) -> float:
        return target_power(
            self.codes, self.alphabet, self.scheme, self.geometry,
            self.tx_power_dbm, include_path_loss, self.ctx,
        )


def pattern_comparison(
    primary: RunRecord,
    reference: RunRecord,
    grid: GridSpec,
    include_path_loss: bool,
    threads: int = 1,
) -> Dict[str, Any]:
    """Target-cell and grid-peak power of two records and their ratios"""
    first, second = RecordDesign.from_record(primary), RecordDesign.from_record(reference)
    p_first, p_second = first.target_power(include_path_loss), second.target_power(include_path_loss)
    g_first = first.pattern(grid, include_path_loss, threads)
    g_second = second.pattern(grid, include_path_loss, threads)
    return {
        'include_path_loss': include_path_loss,
        'target_power': p_first,
        'reference_target_power': p_second,
        'peak_power_ratio': p_first / p_second,
        'grid_peak': g_first.peak(),
        'reference_grid_peak': g_second.peak(),
        'grid_peak_ratio': g_first.peak()['power'] / g_second.peak()['power'],
    }


# --- sweeps -----------------------------------------------------------------

# bit/s/Hz per unit of log2(S) at high SNR: coherent gain grows as S^2
ELEMENT_SLOPE = 2.0


def layout_for(elements: int) -> Tuple[int, int]:
    """Most square M x N factorization with M <= N"""
    rows = int(math.isqrt(elements))
    while elements % rows:
        rows -= 1
    return rows, elements // rows


def apply_axis(cfg: ScenarioConfig, axis: str, value: float, method: Optional[str] = None) -> ScenarioConfig:
    """
    Scenario of one sweep cell. The bits axis only moves the static-surface methods;
    frequency-diverse methods keep the scenario's own resolution.
    """
    validate_sweep_axis(axis)
    data = cfg.model_dump()
    if axis == 'S':
        data['geometry']['rows'], data['geometry']['cols'] = layout_for(int(value))
    elif axis == 'P':
        data['power']['tx_power_dbm'] = float(value)
    elif method is None or not method.startswith('fdris-'):
        data['modulation']['bits'] = int(value)
    return validate_scenario(data, source=f"sweep {axis}={value}")


def apply_user(cfg: ScenarioConfig, user: PlacementBlock) -> ScenarioConfig:
    """Scenario with the design target moved to `user`"""
    data = cfg.model_dump()
    data['geometry']['user'] = user.model_dump()
    return validate_scenario(data, source=f"user {user_label(user)}")


def trial_seed(base: int, cell: int, trial: int) -> int:
    """Independent stream per (axis value, trial); shared by all methods of a cell"""
    return int(np.random.SeedSequence(base, spawn_key=(cell, trial)).generate_state(1)[0])


def solve_method(cfg: ScenarioConfig, method: str) -> float:
    """Best rate reached by one sweep method (`<surface>-<optimizer>`)"""
    surface, optimizer = method.split('-', 1)
    if surface == 'ris':
        cfg = cfg.conventional()
    scenario = Scenario.from_config(cfg)
    if optimizer == 'oracle':
        oracle = ris_quantized_oracle(scenario.pair, scenario.alphabet)
        return rate_from_gain(oracle.gain, scenario.noise_power)
    return optimize(scenario, optimizer).rate


@dataclass(frozen=True)
class SweepResult:
    axis: str
    rows: List[Dict[str, Any]]
    gains: List[Dict[str, Any]]


def db_equivalent_gains(axis: str, values: Sequence[float], rows: Sequence[Dict[str, Any]]) -> List[Dict[str, Any]]:
    """
    Transmit-power offset (dB) at which each static-surface method would match each
    frequency-diverse method. Along the power axis the reference curve is
    interpolated; elsewhere the high-SNR slope log2(10)/10 bit per dB converts the gap.
    Along the element axis each row also carries the share of elements saved: the
    reference curve, interpolated in log2(S), gives the count it needs for the same rate.
    """
    means = {(r['axis_value'], r['method']): r['mean_rate'] for r in rows}
    methods = list(dict.fromkeys(r['method'] for r in rows))
    axis_values = np.asarray(values, dtype=float)
    gains = []
    for fd in (m for m in methods if m.startswith('fdris-')):
        for ris in (m for m in methods if m.startswith('ris-')):
            ref_rates = np.array([means[(v, ris)] for v in values])
            for v in values:
                rate = means[(v, fd)]
                gap = rate - means[(v, ris)]
                if axis == 'P':
                    gain_db = _axis_to_match(axis_values, ref_rates, rate, HIGH_SNR_SLOPE) - v
                else:
                    gain_db = gap / HIGH_SNR_SLOPE
                savings = None
                if axis == 'S':
                    needed = 2.0 ** _axis_to_match(np.log2(axis_values), ref_rates, rate, ELEMENT_SLOPE)
                    savings = float(1.0 - v / needed)
                gains.append({
                    'axis_value': v,
                    'method': fd,
                    'reference': ris,
                    'rate_gap': float(gap),
                    'gain_db': float(gain_db),
                    'element_savings': savings,
                })
    return gains


def _axis_to_match(xs: np.ndarray, rates: np.ndarray, rate: float, slope: float) -> float:
    """Axis position where the reference curve reaches `rate`, extrapolated past its ends with `slope`"""
    order = np.argsort(rates, kind='stable')
    r, x = rates[order], xs[order]
    if rate <= r[0]:
        return float(x[0] + (rate - r[0]) / slope)
    if rate >= r[-1]:
        return float(x[-1] + (rate - r[-1]) / slope)
    return float(np.interp(rate, r, x))


def run_sweep(
    cfg: ScenarioConfig,
    axis: str,
    values: Sequence[float],
    methods: Sequence[str],
    trials: int = 5,
    threads: int = 1,
) -> SweepResult:
    validate_sweep_axis(axis)
    if trials < 1:
        raise ConfigError("A sweep needs at least one trial", "INVALID_TRIALS", {'trials': trials})
    jobs = []
    for cell, value in enumerate(values):
        for method in methods:
            method_cfg = apply_axis(cfg, axis, value, method)
            for trial in range(trials):
                seeded = method_cfg.model_copy(update={'seed': trial_seed(cfg.seed, cell, trial)})
                jobs.append((value, method, seeded))

    def _job(job):
        value, method, job_cfg = job
        rate = solve_method(job_cfg, method)
        logger.info(f"Sweep {axis}={value} {method} seed {job_cfg.seed}: {rate:.6f} bit/s/Hz")
        return rate

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rates = list(pool.map(_job, jobs))

    rows = []
    for value in values:
        for method in methods:
            sample = np.array([r for (v, m, _), r in zip(jobs, rates) if v == value and m == method])
            rows.append({
                'axis_value': value,
                'method': method,
                'mean_rate': float(sample.mean()),
                'std_rate': float(sample.std()),
                'trials': int(sample.size),
            })
    return SweepResult(axis, rows, db_equivalent_gains(axis, list(values), rows))
