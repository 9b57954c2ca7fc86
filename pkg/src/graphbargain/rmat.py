"""Recursive-matrix edge sampling and sanitization into simple connected graphs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, MetricPoint, largest_connected_component, metric_projection

__all__ = [
    "RmatParams",
    "VanishedGraphError",
    "DegenerateParametersError",
    "generate_raw_edges",
    "sanitize",
    "generate_graph",
]

MAX_ATTEMPTS = 16


class VanishedGraphError(ValueError):
    """Sanitization removed every edge; the caller should resample."""


class DegenerateParametersError(ValueError):
    """MAX_ATTEMPTS consecutive samples vanished for one parameter set."""


@dataclass(frozen=True)
class RmatParams:
    """One generator configuration: requested sizes plus the quadrant vector.

    The quadrant probabilities (a, b, c, d) select (top-left, top-right,
    bottom-left, bottom-right) at every recursion level; a must dominate.
    """

    n_param: int
    e_param: int
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self) -> None:
        if self.n_param < 2:
            raise ValueError("n_param must be at least 2")
        if self.e_param < self.n_param - 1:
            raise ValueError("e_param must be at least n_param - 1")
        comps = (self.a, self.b, self.c, self.d)
        if min(comps) < 0.0:
            raise ValueError("quadrant probabilities must be non-negative")
        if abs(sum(comps) - 1.0) > 1e-9:
            raise ValueError("quadrant probabilities must sum to 1")
        if self.a < max(self.b, self.c, self.d):
            raise ValueError("a must dominate b, c and d")

    @property
    def r(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    @property
    def scale(self) -> int:
        """Recursion depth: ceil(log2(n_param))."""
        return (self.n_param - 1).bit_length()


def generate_raw_edges(p: RmatParams, seed: int) -> np.ndarray:
    """Sample e_param directed edges over the padded 2^scale matrix.

    Each edge is placed by ``scale`` independent quadrant draws from
    (a, b, c, d); the quadrant fixes one bit of each endpoint per level.
    Returns an (e_param, 2) int array; deterministic for a given seed.
    """
    rng = np.random.default_rng(seed)
    cuts = np.cumsum([p.a, p.b, p.c])
    e = p.e_param
    u = np.zeros(e, dtype=np.int64)
    v = np.zeros(e, dtype=np.int64)
    for _ in range(p.scale):
        quad = np.searchsorted(cuts, rng.random(e), side="right")
        u = (u << 1) | (quad >> 1)
        v = (v << 1) | (quad & 1)
    return np.column_stack([u, v])


def sanitize(edges: np.ndarray, n_param: int) -> Graph:
    """Raw directed edges -> simple connected undirected graph.

    Drops self-loops and endpoints outside [0, n_param) (the padding part of
    the power-of-two matrix), merges (u,v)/(v,u), deduplicates, then keeps
    the largest connected component.
    """
    arr = np.asarray(edges, dtype=np.int64)
    if arr.size == 0:
        raise ValueError("no edges to sanitize")
    arr = arr.reshape(-1, 2)
    keep = (arr[:, 0] != arr[:, 1]) & (arr < n_param).all(axis=1)
    arr = arr[keep]
    if arr.size == 0:
        raise VanishedGraphError("vanished graph")
    lo = arr.min(axis=1)
    hi = arr.max(axis=1)
    n = int(hi.max()) + 1
    keys = np.unique(lo * n + hi)
    g = Graph._from_half_edges(keys // n, keys % n, n)
    return largest_connected_component(g)


def generate_graph(p: RmatParams, seed: int) -> tuple[Graph, MetricPoint]:
    """Sanitized graph plus its metric projection.

    Resamples with seed+1, seed+2, ... when sanitization vanishes; gives up
    after MAX_ATTEMPTS consecutive vanished graphs.
    """
    for attempt in range(MAX_ATTEMPTS):
        edges = generate_raw_edges(p, seed + attempt)
        try:
            g = sanitize(edges, p.n_param)
        except VanishedGraphError:
            continue
        return g, metric_projection(g)
    raise DegenerateParametersError("degenerate parameters")
