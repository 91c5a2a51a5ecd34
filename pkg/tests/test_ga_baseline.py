"""
Genetic Algorithm Baseline Tests
--------------------------------
"""

import numpy as np
import pytest

from src.services.ga_baseline import GaConfig, ga_run
from src.services.scenario import Scenario, exhaustive_optimum
from src.utils.exceptions import FdRisError
from tests.helpers import tiny_config


def test_default_mutation_settings():
    config = GaConfig(freq_bounds=(1e5, 2.8e5))
    assert config.gene_mutation_rate(28) == pytest.approx(1 / 28)
    assert config.freq_sigma() == pytest.approx(9e3)
    tuned = GaConfig(mutation_rate_discrete=0.2, mutation_sigma_freq=100.0)
    assert tuned.gene_mutation_rate(28) == 0.2
    assert tuned.freq_sigma() == 100.0


def test_config_validation():
    with pytest.raises(FdRisError) as err:
        GaConfig(pop_size=1)
    assert err.value.error_code == "INVALID_POPULATION"
    with pytest.raises(FdRisError) as err:
        GaConfig(pop_size=4, elitism_count=5)
    assert err.value.error_code == "INVALID_ELITISM"
    with pytest.raises(FdRisError):
        GaConfig(pop_size=4, tournament_size=6)
    with pytest.raises(FdRisError):
        GaConfig(crossover_rate=1.5)


def test_from_scenario_reads_block():
    scenario = Scenario.from_config(tiny_config(optimizer={'ga': {'pop_size': 30, 'elitism_count': 3}}, seed=9))
    config = GaConfig.from_scenario(scenario)
    assert config.pop_size == 30
    assert config.elitism_count == 3
    assert config.rng_seed == 9
    assert config.freq_bounds == scenario.freq_bounds


def test_run_bookkeeping(tiny_cfg):
    scenario = Scenario.from_config(tiny_cfg)
    result = ga_run(scenario)
    generations = tiny_cfg.optimizer.ga.generations
    pop = tiny_cfg.optimizer.ga.pop_size
    assert result.generations == generations
    assert len(result.history) == generations + 1
    assert result.evaluations == pop * (generations + 1)
    assert result.genes.shape == (pop, 4)
    assert np.all((result.freqs >= 1e5) & (result.freqs <= 2.8e5))


def test_elitism_keeps_the_leader(tiny_cfg):
    result = ga_run(Scenario.from_config(tiny_cfg))
    leaders = [h.iteration_best_rate for h in result.history]
    assert leaders == sorted(leaders)
    assert result.best.objective == result.history[-1].best_rate


def test_run_is_deterministic(tiny_cfg):
    scenario = Scenario.from_config(tiny_cfg)
    first, second = ga_run(scenario), ga_run(scenario)
    assert first.history == second.history
    np.testing.assert_array_equal(first.genes, second.genes)
    np.testing.assert_array_equal(first.best.codes.codes, second.best.codes.codes)


def test_zero_generations_only_scores_initial_population(tiny_cfg):
    scenario = Scenario.from_config(tiny_config(optimizer={'ga': {'generations': 0}}))
    result = ga_run(scenario)
    assert len(result.history) == 1
    assert result.evaluations == tiny_cfg.optimizer.ga.pop_size


def test_frozen_population_keeps_a_constant_history():
    """No crossover, no mutation and every individual kept as an elite"""
    scenario = Scenario.from_config(tiny_config())
    frozen = dict(
        pop_size=12, tournament_size=2, crossover_rate=0.0, mutation_rate_discrete=0.0,
        mutation_sigma_freq=0.0, elitism_count=12, rng_seed=5, freq_bounds=scenario.freq_bounds,
    )
    initial = ga_run(scenario, GaConfig(generations=0, **frozen))
    result = ga_run(scenario, GaConfig(generations=10, **frozen))
    assert len(result.history) == 11
    first = result.history[0]
    for entry in result.history:
        assert entry.best_rate == pytest.approx(first.best_rate, rel=1e-12)
        assert entry.iteration_best_rate == pytest.approx(first.iteration_best_rate, rel=1e-12)
        assert entry.mean_elite_rate == pytest.approx(first.mean_elite_rate, rel=1e-12)
        assert entry.mod_freq_mean == pytest.approx(first.mod_freq_mean, rel=1e-12)
        assert entry.mean_entropy_bits == pytest.approx(first.mean_entropy_bits, rel=1e-12)
    # elitism may reorder the individuals but never replaces one
    assert sorted(map(tuple, result.genes.tolist())) == sorted(map(tuple, initial.genes.tolist()))
    assert sorted(result.freqs.tolist()) == sorted(initial.freqs.tolist())


def test_run_reaches_exhaustive_optimum():
    base = tiny_config(optimizer={'ga': {'pop_size': 200, 'generations': 60}})
    freqs = np.linspace(1e5, 2.8e5, 64)
    hits = 0
    for trial in range(20):
        scenario = Scenario.from_config(base.model_copy(update={'seed': trial}))
        target = exhaustive_optimum(scenario, freqs).rate
        hits += ga_run(scenario).best.objective >= target * (1 - 1e-4)
    assert hits >= 16
