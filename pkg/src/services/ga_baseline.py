"""
Genetic Algorithm Baseline
--------------------------
Comparison optimizer for the same problem. A chromosome is the P = S * L code
genes plus one real gene for f0. Tournament selection, uniform crossover,
per-gene categorical resampling, Gaussian f0 mutation with clamping and elitism.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.services.ceo_optimizer import Candidate, IterationRecord
from src.services.scenario import Scenario
from src.services.signal_core import ReflectionCodes
from src.utils.exceptions import FdRisError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GaConfig:
    pop_size: int = 200
    generations: int = 500
    tournament_size: int = 4
    crossover_rate: float = 0.9
    # None selects 1 / P
    mutation_rate_discrete: Optional[float] = None
    # None selects 5% of the frequency range
    mutation_sigma_freq: Optional[float] = None
    elitism_count: int = 2
    rng_seed: int = 0
    freq_bounds: Tuple[float, float] = (100e3, 280e3)

    def __post_init__(self):
        if self.pop_size < 2:
            raise FdRisError("Population needs at least two individuals", "INVALID_POPULATION", {'pop_size': self.pop_size})
        if not 0 <= self.elitism_count <= self.pop_size:
            raise FdRisError("Elitism count out of range", "INVALID_ELITISM", {'elitism_count': self.elitism_count})
        if not 1 <= self.tournament_size <= self.pop_size:
            raise FdRisError("Tournament size out of range", "INVALID_TOURNAMENT", {'tournament_size': self.tournament_size})
        for name in ('crossover_rate', 'mutation_rate_discrete'):
            rate = getattr(self, name)
            if rate is not None and not 0 <= rate <= 1:
                raise FdRisError(f"{name} must lie in [0, 1]", "INVALID_RATE", {name: rate})
        lo, hi = self.freq_bounds
        if not 0 < lo <= hi:
            raise FdRisError(
                "Frequency bounds must satisfy 0 < f_min <= f_max",
                "INVALID_FREQ_BOUNDS",
                {'freq_bounds': list(self.freq_bounds)},
            )

    def gene_mutation_rate(self, positions: int) -> float:
        return self.mutation_rate_discrete if self.mutation_rate_discrete is not None else 1.0 / positions

    def freq_sigma(self) -> float:
        lo, hi = self.freq_bounds
        return self.mutation_sigma_freq if self.mutation_sigma_freq is not None else 0.05 * (hi - lo)

    @classmethod
    def from_scenario(cls, scenario: Scenario) -> "GaConfig":
        block = scenario.config.optimizer.ga
        return cls(
            pop_size=block.pop_size,
            generations=block.generations,
            tournament_size=block.tournament_size,
            crossover_rate=block.crossover_rate,
            mutation_rate_discrete=block.mutation_rate_discrete,
            mutation_sigma_freq=block.mutation_sigma_freq,
            elitism_count=block.elitism_count,
            rng_seed=scenario.config.seed,
            freq_bounds=scenario.freq_bounds,
        )


@dataclass(frozen=True)
class GaResult:
    best: Candidate
    history: Tuple[IterationRecord, ...]
    generations: int
    evaluations: int
    # final population, (pop, P) genes and (pop,) frequencies
    genes: np.ndarray
    freqs: np.ndarray


def _ranking(fitness: np.ndarray) -> np.ndarray:
    """Population indices from best to worst, ties to the lower index"""
    return np.lexsort((np.arange(len(fitness)), -fitness))


def _gene_entropy(genes: np.ndarray, levels: int) -> float:
    pop, positions = genes.shape
    cells = np.arange(positions)[None, :] * levels + genes
    freq = np.bincount(cells.reshape(-1), minlength=positions * levels).reshape(positions, levels) / pop
    with np.errstate(divide='ignore', invalid='ignore'):
        terms = np.where(freq > 0, -freq * np.log2(freq), 0.0)
    return float(terms.sum(axis=1).mean())


def _tournament(rank_of: np.ndarray, count: int, size: int, rng: np.random.Generator) -> np.ndarray:
    entrants = rng.integers(len(rank_of), size=(count, size))
    return entrants[np.arange(count), np.argmin(rank_of[entrants], axis=1)]


def _breed(
    genes: np.ndarray,
    freqs: np.ndarray,
    order: np.ndarray,
    config: GaConfig,
    levels: int,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray]:
    pop, positions = genes.shape
    offspring = pop - config.elitism_count
    rank_of = np.empty(pop, dtype=np.int64)
    rank_of[order] = np.arange(pop)

    first = _tournament(rank_of, offspring, config.tournament_size, rng)
    second = _tournament(rank_of, offspring, config.tournament_size, rng)

    # uniform crossover over all P + 1 genes
    crossing = rng.random(offspring) < config.crossover_rate
    mask = rng.random((offspring, positions + 1)) < 0.5
    mask &= crossing[:, None]
    child_genes = np.where(mask[:, :positions], genes[second], genes[first])
    child_freqs = np.where(mask[:, positions], freqs[second], freqs[first])

    mutate = rng.random((offspring, positions)) < config.gene_mutation_rate(positions)
    child_genes = np.where(mutate, rng.integers(levels, size=(offspring, positions)), child_genes)
    sigma = config.freq_sigma()
    if sigma > 0:
        child_freqs = child_freqs + rng.normal(0.0, sigma, size=offspring)
    child_freqs = np.clip(child_freqs, *config.freq_bounds)

    elite = order[:config.elitism_count]
    return (
        np.concatenate([genes[elite], child_genes]),
        np.concatenate([freqs[elite], child_freqs]),
    )


def ga_run(scenario: Scenario, config: Optional[GaConfig] = None) -> GaResult:
    config = config or GaConfig.from_scenario(scenario)
    rng = np.random.default_rng(config.rng_seed)
    levels = scenario.alphabet.size
    shape = scenario.code_shape
    positions = shape[0] * shape[1]
    lo, hi = config.freq_bounds

    genes = rng.integers(levels, size=(config.pop_size, positions))
    freqs = rng.uniform(lo, hi, size=config.pop_size)
    history = []
    best: Optional[Candidate] = None
    evaluations = 0

    for generation in range(config.generations + 1):
        if generation > 0:
            genes, freqs = _breed(genes, freqs, order, config, levels, rng)
        fitness = scenario.rates(genes.reshape(-1, *shape), freqs)
        evaluations += config.pop_size
        order = _ranking(fitness)
        leader = int(order[0])
        if best is None or fitness[leader] > best.objective:
            best = Candidate(
                ReflectionCodes(genes[leader].reshape(shape), levels),
                float(freqs[leader]),
                float(fitness[leader]),
                leader,
            )
        top = order[:max(config.elitism_count, 1)]
        history.append(IterationRecord(
            iteration=generation,
            best_rate=best.objective,
            iteration_best_rate=float(fitness[leader]),
            mean_elite_rate=float(fitness[top].mean()),
            mod_freq_mean=float(freqs.mean()),
            mod_freq_std=float(freqs.std()),
            mean_entropy_bits=_gene_entropy(genes, levels),
        ))
        logger.debug(f"GA generation {generation}: best {best.objective:.6f}")

    logger.info(
        f"GA finished after {config.generations} generations: rate {best.objective:.6f} bit/s/Hz "
        f"at f0 = {best.mod_freq:.1f} Hz"
    )
    return GaResult(best, tuple(history), config.generations, evaluations, genes, freqs)
