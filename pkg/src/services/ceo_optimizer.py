"""
Cross-Entropy Optimizer
-----------------------
Joint sampling of reflection codes (independent categorical rows P_pq) and the
modulation frequency (Gaussian N(mu, sigma^2) constrained to [f_min, f_max]).
Each iteration keeps the ceil(rho K) best samples, refits the tilting parameters to
them in closed form (elite frequencies, elite mean, elite population std) and
mixes the refit with the previous parameters through the smoothing weight xi.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.services.scenario import Scenario
from src.services.signal_core import ReflectionCodes
from src.utils.exceptions import FdRisError

logger = logging.getLogger(__name__)

# largest (count, positions, levels) comparison block built while sampling codes
SAMPLE_BLOCK_CELLS = 1 << 24


@dataclass(frozen=True)
class CeoConfig:
    pop_size: int = 200
    elite_frac: float = 0.1
    smoothing: float = 0.65
    freq_bounds: Tuple[float, float] = (100e3, 280e3)
    max_iters: int = 500
    stall_iters: int = 5
    stall_tol: float = 1e-4
    rng_seed: int = 0
    prob_floor: float = 1e-6
    sigma_floor_frac: float = 1e-6
    max_rejections: int = 100

    def __post_init__(self):
        if self.pop_size < 1:
            raise FdRisError("Population needs at least one candidate", "INVALID_POPULATION", {'pop_size': self.pop_size})
        for name in ('max_iters', 'stall_iters'):
            if getattr(self, name) < 1:
                raise FdRisError(f"{name} must be at least 1", "INVALID_ITERATIONS", {name: getattr(self, name)})
        lo, hi = self.freq_bounds
        if not 0 < lo <= hi:
            raise FdRisError(
                "Frequency bounds must satisfy 0 < f_min <= f_max",
                "INVALID_FREQ_BOUNDS",
                {'freq_bounds': list(self.freq_bounds)},
            )
        if not 0 < self.elite_frac < 1 or self.elite_count < 1:
            raise FdRisError(
                "Elite fraction must lie in (0, 1) and leave at least one elite",
                "INVALID_ELITE_FRACTION",
                {'elite_frac': self.elite_frac, 'pop_size': self.pop_size},
            )
        if not 0 <= self.smoothing <= 1:
            raise FdRisError("Smoothing must lie in [0, 1]", "INVALID_SMOOTHING", {'smoothing': self.smoothing})

    @property
    def elite_count(self) -> int:
        return math.ceil(self.elite_frac * self.pop_size - 1e-9)

    @property
    def sigma_floor(self) -> float:
        lo, hi = self.freq_bounds
        return self.sigma_floor_frac * (hi - lo)

    @classmethod
    def from_scenario(cls, scenario: Scenario) -> "CeoConfig":
        block = scenario.config.optimizer.ceo
        return cls(
            pop_size=block.pop_size,
            elite_frac=block.elite_frac,
            smoothing=block.smoothing,
            freq_bounds=scenario.freq_bounds,
            max_iters=block.max_iters,
            stall_iters=block.stall_iters,
            stall_tol=block.stall_tol,
            rng_seed=scenario.config.seed,
        )


@dataclass(frozen=True, eq=False)
class CategoricalTilting:
    """P x Q matrix; row p is the distribution of code position p = s * L + l"""

    probs: np.ndarray = field(repr=False)
    code_shape: Tuple[int, int]

    def __post_init__(self):
        self.probs.setflags(write=False)

    @property
    def levels(self) -> int:
        return self.probs.shape[1]

    @classmethod
    def uniform(cls, code_shape: Tuple[int, int], levels: int) -> "CategoricalTilting":
        positions = code_shape[0] * code_shape[1]
        return cls(np.full((positions, levels), 1.0 / levels), code_shape)

    def entropy_bits(self) -> np.ndarray:
        p = self.probs
        with np.errstate(divide='ignore', invalid='ignore'):
            terms = np.where(p > 0, -p * np.log2(p), 0.0)
        return terms.sum(axis=1)


@dataclass(frozen=True)
class GaussianTilting:
    mean: float
    stddev: float

    def __post_init__(self):
        if self.stddev < 0:
            raise FdRisError("Standard deviation must be non-negative", "INVALID_STDDEV", {'stddev': self.stddev})


@dataclass(frozen=True)
class Candidate:
    codes: ReflectionCodes
    mod_freq: float
    objective: Optional[float] = None
    index: int = 0


@dataclass(frozen=True)
class IterationRecord:
    """One history row, shared by the cross-entropy and genetic optimizers"""

    iteration: int
    best_rate: float
    iteration_best_rate: float
    mean_elite_rate: float
    mod_freq_mean: float
    mod_freq_std: float
    mean_entropy_bits: float


@dataclass(frozen=True)
class CeoState:
    cat: CategoricalTilting
    gauss: GaussianTilting
    iteration: int = 0
    best: Optional[Candidate] = None
    history: Tuple[IterationRecord, ...] = ()
    evaluations: int = 0

    @classmethod
    def initial(cls, scenario: Scenario, config: CeoConfig) -> "CeoState":
        """Uniform P, mu at the band center, sigma at half the band"""
        lo, hi = config.freq_bounds
        return cls(
            cat=CategoricalTilting.uniform(scenario.code_shape, scenario.alphabet.size),
            gauss=GaussianTilting((lo + hi) / 2, (hi - lo) / 2),
        )


def sample_frequencies(
    gauss: GaussianTilting,
    bounds: Tuple[float, float],
    count: int,
    rng: np.random.Generator,
    max_rejections: int = 100,
) -> np.ndarray:
    """Draw from N(mu, sigma^2) by rejection into [f_min, f_max], clamping what is left"""
    lo, hi = bounds
    if gauss.stddev == 0:
        return np.full(count, float(np.clip(gauss.mean, lo, hi)))
    freqs = rng.normal(gauss.mean, gauss.stddev, size=count)
    for _ in range(max_rejections - 1):
        outside = (freqs < lo) | (freqs > hi)
        if not outside.any():
            break
        freqs[outside] = rng.normal(gauss.mean, gauss.stddev, size=int(outside.sum()))
    return np.clip(freqs, lo, hi)


def sample_codes(cat: CategoricalTilting, count: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draw of every code position; returns (count, S, L) indices"""
    cdf = np.cumsum(cat.probs, axis=1)
    positions, levels = cdf.shape
    u = rng.random((count, positions))
    # draw = number of CDF entries <= u; positions are compared in blocks of bounded size
    block = max(1, SAMPLE_BLOCK_CELLS // max(1, count * levels))
    draws = np.concatenate([
        (u[:, p:p + block, None] >= cdf[None, p:p + block]).sum(axis=-1, dtype=np.int64)
        for p in range(0, positions, block)
    ], axis=1)
    np.minimum(draws, levels - 1, out=draws)
    return draws.reshape(count, *cat.code_shape)


def sample_candidates(state: CeoState, config: CeoConfig, rng: np.random.Generator) -> List[Candidate]:
    """K candidates from F(gamma; P) x F(f0; sigma, mu), codes drawn before frequencies"""
    codes = sample_codes(state.cat, config.pop_size, rng)
    freqs = sample_frequencies(state.gauss, config.freq_bounds, config.pop_size, rng, config.max_rejections)
    levels = state.cat.levels
    return [
        Candidate(ReflectionCodes(codes[k], levels), float(freqs[k]), index=k)
        for k in range(config.pop_size)
    ]


def evaluate(candidate: Candidate, scenario: Scenario) -> float:
    """Achievable rate of one candidate"""
    rates = scenario.rates(candidate.codes.codes[None], np.array([candidate.mod_freq]))
    return float(rates[0])


def evaluate_candidates(candidates: Sequence[Candidate], scenario: Scenario) -> List[Candidate]:
    """Batch form of `evaluate`; results stay in sampling-index order"""
    ordered = sorted(candidates, key=lambda c: c.index)
    codes = np.stack([c.codes.codes for c in ordered])
    freqs = np.array([c.mod_freq for c in ordered])
    rates = scenario.rates(codes, freqs)
    return [replace(c, objective=float(r)) for c, r in zip(ordered, rates)]


def select_elite(candidates: Sequence[Candidate], config: CeoConfig) -> List[Candidate]:
    """The ceil(rho K) best candidates, ties going to the lower sampling index"""
    if not candidates:
        raise FdRisError("Cannot select elites from an empty population", "EMPTY_POPULATION")
    if any(c.objective is None for c in candidates):
        raise FdRisError("Every candidate must be evaluated before selection", "UNEVALUATED_CANDIDATE")
    ranked = sorted(candidates, key=lambda c: (-c.objective, c.index))
    return ranked[:min(config.elite_count, len(ranked))]


def elite_statistics(elites: Sequence[Candidate], levels: int) -> Tuple[np.ndarray, float, float]:
    """Closed-form cross-entropy fit before smoothing: (P_pq, mu, sigma)"""
    if not elites:
        raise FdRisError("Cannot fit tilting parameters without elites", "EMPTY_POPULATION")
    gammas = np.stack([c.codes.flatten() for c in elites])
    count, positions = gammas.shape
    cells = np.arange(positions)[None, :] * levels + gammas
    probs = np.bincount(cells.reshape(-1), minlength=positions * levels).reshape(positions, levels) / count
    freqs = np.array([c.mod_freq for c in elites])
    mean = float(freqs.mean())
    # population std around the freshly fitted mean
    stddev = float(np.sqrt(np.mean((freqs - mean) ** 2)))
    return probs, mean, stddev


def update_tilting(state: CeoState, elites: Sequence[Candidate], config: CeoConfig) -> CeoState:
    """Refit {P, mu, sigma} to the elites, then x <- xi x_new + (1 - xi) x_old"""
    xi = config.smoothing
    probs_new, mean_new, std_new = elite_statistics(elites, state.cat.levels)
    probs = xi * probs_new + (1 - xi) * state.cat.probs
    if config.prob_floor > 0:
        probs = np.maximum(probs, config.prob_floor)
        probs /= probs.sum(axis=1, keepdims=True)
    mean = xi * mean_new + (1 - xi) * state.gauss.mean
    stddev = max(xi * std_new + (1 - xi) * state.gauss.stddev, config.sigma_floor)
    return replace(
        state,
        cat=CategoricalTilting(probs, state.cat.code_shape),
        gauss=GaussianTilting(mean, stddev),
    )


def run(scenario: Scenario, config: Optional[CeoConfig] = None) -> CeoState:
    """
    sample -> evaluate -> select -> update until the best-so-far rate gains less than
    `stall_tol` for `stall_iters` consecutive iterations, or `max_iters` is reached.
    """
    config = config or CeoConfig.from_scenario(scenario)
    rng = np.random.default_rng(config.rng_seed)
    state = CeoState.initial(scenario, config)
    stalled = 0
    history: List[IterationRecord] = []

    for it in range(1, config.max_iters + 1):
        candidates = evaluate_candidates(sample_candidates(state, config, rng), scenario)
        elites = select_elite(candidates, config)
        leader = elites[0]
        previous = state.best.objective if state.best is not None else -np.inf
        best = leader if leader.objective > previous else state.best
        stalled = stalled + 1 if best.objective - previous < config.stall_tol else 0

        state = update_tilting(state, elites, config)
        history.append(IterationRecord(
            iteration=it,
            best_rate=best.objective,
            iteration_best_rate=leader.objective,
            mean_elite_rate=float(np.mean([c.objective for c in elites])),
            mod_freq_mean=state.gauss.mean,
            mod_freq_std=state.gauss.stddev,
            mean_entropy_bits=float(state.cat.entropy_bits().mean()),
        ))
        state = replace(state, iteration=it, best=best, evaluations=state.evaluations + len(candidates))
        logger.debug(
            f"CEO iteration {it}: best {best.objective:.6f}, elite mean {history[-1].mean_elite_rate:.6f}, "
            f"mu {state.gauss.mean:.1f} Hz, sigma {state.gauss.stddev:.1f} Hz"
        )
        if stalled >= config.stall_iters:
            break

    logger.info(
        f"CEO finished after {state.iteration} iterations: rate {state.best.objective:.6f} bit/s/Hz "
        f"at f0 = {state.best.mod_freq:.1f} Hz"
    )
    return replace(state, history=tuple(history))
