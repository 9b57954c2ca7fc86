"""Search for the Beta parameter vector q that evens out the metric spread.

The eight Beta parameters are evolved in log space with a plain differential
evolution scheme (rand/1/bin).  Selection uses fitness on the train model;
the holdout model decides what gets reported and when to stop.  Candidates
whose pushed mass (coverage) falls below a floor relative to the uniform
candidate are assigned the worst possible fitness, which keeps the search
away from regions the baseline sample never visited.

Every random draw comes from a generator seeded with (seed, generation,
candidate index), so runs are reproducible regardless of evaluation order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .errors import ConfigError, CoverageCollapseError
from .graph import MetricPoint
from .grids import ConditionalModel, MetricGrid, ParamGrid, build_conditional, conditional_from_pairs, predicted_mass
from .objective import Fitness, bargaining_fitness, fitness_bounds
from .params import QVector, UnitPoint

__all__ = [
    "OptimizerConfig",
    "GenerationStats",
    "OptimizationResult",
    "split_baseline",
    "split_model",
    "optimize",
]

logger = logging.getLogger(__name__)

# Initial population jitter range in log space.
_JITTER_LOW = float(np.log(0.25))
_JITTER_HIGH = float(np.log(4.0))


@dataclass(frozen=True)
class OptimizerConfig:
    """Search settings.

    The run stops early once `patience` consecutive generations each improve
    the best holdout fitness by less than `tolerance`.  A single stagnant
    generation is common long before the search is done, so the patience
    window keeps one quiet generation from ending the run.
    """

    population_size: int = 32
    max_generations: int = 50
    tolerance: float = 1e-3
    patience: int = 15
    holdout_fraction: float = 0.2
    bound_low: float = 1e-3
    bound_high: float = 100.0
    coverage_floor_ratio: float = 0.5
    mutation_factor: float = 0.7
    crossover_rate: float = 0.9
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population_size < 4:
            raise ConfigError("population_size must be at least 4")
        if self.max_generations < 1:
            raise ConfigError("max_generations must be at least 1")
        if not self.tolerance > 0.0:
            raise ConfigError("tolerance must be positive")
        if self.patience < 1:
            raise ConfigError("patience must be at least 1")
        if not 0.0 < self.holdout_fraction < 1.0:
            raise ConfigError("holdout_fraction must lie in (0, 1)")
        if not 0.0 < self.bound_low < self.bound_high <= 100.0:
            raise ConfigError("need 0 < bound_low < bound_high <= 100")
        if not 0.0 <= self.coverage_floor_ratio <= 1.0:
            raise ConfigError("coverage_floor_ratio must lie in [0, 1]")
        if not 0.0 < self.mutation_factor <= 2.0:
            raise ConfigError("mutation_factor must lie in (0, 2]")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ConfigError("crossover_rate must lie in [0, 1]")


@dataclass(frozen=True)
class GenerationStats:
    """Progress snapshot after a generation; best_holdout is best seen so far."""

    generation: int
    best_train: Fitness
    best_holdout: Fitness
    coverage: float


@dataclass(frozen=True)
class OptimizationResult:
    best_q: QVector
    best_holdout_fitness: Fitness
    best_coverage: float
    generations_run: int
    trace: tuple[GenerationStats, ...] = field(repr=False)


def _check_fraction(fraction: float) -> None:
    if not 0.0 < fraction < 1.0:
        raise ValueError("holdout fraction must lie in (0, 1)")


def split_baseline(
    records: Iterable[tuple[UnitPoint, MetricPoint]],
    holdout_fraction: float,
    seed: int,
    metric_grid: MetricGrid | None = None,
    param_grid: ParamGrid | None = None,
) -> tuple[ConditionalModel, ConditionalModel]:
    """Random record-level split of a baseline sample into two models."""
    _check_fraction(holdout_fraction)
    records = list(records)
    if len(records) < 10:
        raise ValueError("need at least 10 records to split")
    n_hold = int(round(len(records) * holdout_fraction))
    if not 0 < n_hold < len(records):
        raise ValueError("degenerate split: one side would be empty")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(records))
    hold = [records[i] for i in order[:n_hold]]
    train = [records[i] for i in order[n_hold:]]
    return (
        build_conditional(train, metric_grid, param_grid),
        build_conditional(hold, metric_grid, param_grid),
    )


def split_model(
    model: ConditionalModel,
    holdout_fraction: float,
    seed: int,
) -> tuple[ConditionalModel, ConditionalModel]:
    """Split a serialized model's counts without access to the raw records.

    Draws the holdout side uniformly over the model's record tokens (a
    multivariate hypergeometric over the (cell, metric) pair counts), which
    matches a record-level split in distribution at the grid's resolution.
    """
    _check_fraction(holdout_fraction)
    if model.total < 10:
        raise ValueError("need at least 10 records to split")
    n_hold = int(round(model.total * holdout_fraction))
    if not 0 < n_hold < model.total:
        raise ValueError("degenerate split: one side would be empty")
    rng = np.random.default_rng(seed)
    hold_counts = rng.multivariate_hypergeometric(model.pair_counts, n_hold)
    train_counts = model.pair_counts - hold_counts
    flat = model.cell_flat[model.pair_cell]
    train = conditional_from_pairs(model.metric_grid, model.param_grid, flat, model.pair_metric, train_counts)
    hold = conditional_from_pairs(model.metric_grid, model.param_grid, flat, model.pair_metric, hold_counts)
    return train, hold


def _q_from_log(z: np.ndarray, config: OptimizerConfig) -> QVector:
    # exp(log(bound)) can overshoot by an ulp; clip in linear space
    return QVector.from_array(np.clip(np.exp(z), config.bound_low, config.bound_high))


def _make_evaluator(
    model: ConditionalModel,
    config: OptimizerConfig,
) -> tuple[Callable[[np.ndarray], tuple[Fitness, float]], float]:
    """Fitness of a log-space vector on one model, with its coverage floor."""
    _, f_max = fitness_bounds(model.metric_grid.cell_count)
    _, uniform_cov = predicted_mass(model, QVector.all_ones())
    floor = config.coverage_floor_ratio * uniform_cov

    def evaluate(z: np.ndarray) -> tuple[Fitness, float]:
        raw, cov = predicted_mass(model, _q_from_log(z, config))
        if not np.isfinite(cov) or cov < floor or cov <= 0.0:
            return f_max, cov
        return bargaining_fitness(raw / raw.sum()), cov

    return evaluate, floor


def optimize(
    train: ConditionalModel,
    holdout: ConditionalModel,
    config: OptimizerConfig | None = None,
) -> OptimizationResult:
    config = config or OptimizerConfig()
    if train.metric_grid != holdout.metric_grid or train.param_grid != holdout.param_grid:
        raise ValueError("train and holdout models use different grids")

    pop = config.population_size
    z_lo = float(np.log(config.bound_low))
    z_hi = float(np.log(config.bound_high))
    eval_train, _ = _make_evaluator(train, config)
    eval_hold, floor_hold = _make_evaluator(holdout, config)

    # Candidate 0 is the uniform vector; the rest jitter around it.
    z = np.zeros((pop, 8))
    for i in range(1, pop):
        rng = np.random.default_rng([config.seed, 0, i])
        z[i] = rng.uniform(_JITTER_LOW, _JITTER_HIGH, size=8)
    np.clip(z, z_lo, z_hi, out=z)

    f_train = np.empty(pop)
    f_hold = np.empty(pop)
    cov_hold = np.empty(pop)
    for i in range(pop):
        f_train[i], _ = eval_train(z[i])
        f_hold[i], cov_hold[i] = eval_hold(z[i])

    best_i = int(np.argmin(f_hold))
    best_z = z[best_i].copy()
    best_fitness = float(f_hold[best_i])
    best_coverage = float(cov_hold[best_i])

    trace = [GenerationStats(0, float(f_train.min()), best_fitness, best_coverage)]
    logger.info("generation 0: train %.6f holdout %.6f coverage %.4g", trace[0].best_train, best_fitness, best_coverage)

    generations_run = 0
    stagnant = 0
    for gen in range(1, config.max_generations + 1):
        new_z = z.copy()
        new_f = f_train.copy()
        accepted = []
        for i in range(pop):
            rng = np.random.default_rng([config.seed, gen, i])
            picks = rng.choice(pop - 1, size=3, replace=False)
            # skip over i so the three partners are distinct from the target
            r1, r2, r3 = (int(j) if j < i else int(j) + 1 for j in picks)
            mutant = z[r1] + config.mutation_factor * (z[r2] - z[r3])
            mask = rng.random(8) < config.crossover_rate
            mask[rng.integers(8)] = True
            trial = np.where(mask, mutant, z[i])
            np.clip(trial, z_lo, z_hi, out=trial)
            ft, _ = eval_train(trial)
            if ft <= f_train[i]:
                new_z[i] = trial
                new_f[i] = ft
                accepted.append(i)
        z, f_train = new_z, new_f
        for i in accepted:
            f_hold[i], cov_hold[i] = eval_hold(z[i])

        generations_run = gen
        prev_best = best_fitness
        cand = int(np.argmin(f_hold))
        if f_hold[cand] < best_fitness:
            best_fitness = float(f_hold[cand])
            best_coverage = float(cov_hold[cand])
            best_z = z[cand].copy()
        trace.append(GenerationStats(gen, float(f_train.min()), best_fitness, best_coverage))
        logger.info(
            "generation %d: train %.6f holdout %.6f coverage %.4g",
            gen, trace[-1].best_train, best_fitness, best_coverage,
        )
        if prev_best - best_fitness < config.tolerance:
            stagnant += 1
            if stagnant >= config.patience:
                break
        else:
            stagnant = 0

    if best_coverage < floor_hold:
        raise CoverageCollapseError(
            f"best candidate keeps only {best_coverage:.3g} mass on the holdout model (floor {floor_hold:.3g})"
        )
    return OptimizationResult(
        best_q=_q_from_log(best_z, config),
        best_holdout_fitness=best_fitness,
        best_coverage=best_coverage,
        generations_run=generations_run,
        trace=tuple(trace),
    )
