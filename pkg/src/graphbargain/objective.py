"""Cooperative bargaining objective over a metric-cell distribution.

Each of the M metric cells is treated as a player whose utility is the
probability mass it receives.  The fitness is the negated mean log2 payoff

    f(p) = -(1/M) * sum_j log2(1 + (M - 1) * p_j)

Lower is better.  The perfectly even split scores f_min, all mass in one
cell scores f_max.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["Fitness", "bargaining_fitness", "fitness_bounds"]

# Fitness values are plain floats; the alias marks intent in signatures.
Fitness = float

_SUM_TOL = 1e-6


def bargaining_fitness(probabilities: np.ndarray) -> Fitness:
    """Fitness of a probability vector over M >= 2 metric cells."""
    p = np.asarray(probabilities, dtype=np.float64)
    if p.ndim != 1 or p.size < 2:
        raise ValueError("invalid distribution: need a 1-d vector with at least 2 cells")
    if np.any(p < 0.0):
        raise ValueError("invalid distribution: negative probability")
    total = float(p.sum())
    if abs(total - 1.0) > _SUM_TOL:
        raise ValueError(f"invalid distribution: sums to {total!r}, not 1")
    p = p / total
    m = p.size
    return float(-np.mean(np.log2(1.0 + (m - 1) * p)))


def fitness_bounds(m: int) -> tuple[Fitness, Fitness]:
    """(f_min, f_max) attainable fitness for an M-cell distribution.

    The uniform spread attains f_min, a single loaded cell f_max; every
    valid distribution scores inside the closed interval.
    """
    if m < 2:
        raise ValueError("need at least 2 cells")
    f_min = -math.log2(2.0 - 1.0 / m)
    f_max = -math.log2(m) / m
    return f_min, f_max
