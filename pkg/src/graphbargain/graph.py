"""Simple undirected graphs and the two metrics that define the metric projection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

__all__ = [
    "Graph",
    "MetricPoint",
    "largest_connected_component",
    "mean_local_clustering",
    "metric_projection",
]


@dataclass(frozen=True)
class MetricPoint:
    """A graph's coordinates in metric space.

    clustering: mean local clustering coefficient, in [0, 1].
    dlog: log10 of the graph density 2E / (N(N-1)); <= 0 for any simple graph.
    """

    clustering: float
    dlog: float


class Graph:
    """Immutable simple undirected graph stored as sorted adjacency lists.

    Internally CSR-shaped: ``indptr`` (length n+1) and ``indices`` (sorted
    neighbor ids per node, each undirected edge appearing twice). Invariants
    (symmetry, no self-loops, no duplicates) are established by the
    constructors; instances are never mutated.
    """

    __slots__ = ("_indptr", "_indices")

    def __init__(self, indptr: np.ndarray, indices: np.ndarray):
        self._indptr = indptr
        self._indices = indices

    @classmethod
    def from_edge_list(
        cls, edges: Iterable[tuple[int, int]], node_count: int | None = None
    ) -> "Graph":
        """Build a graph from undirected edges, validating simplicity.

        Rejects self-loops and edges listed twice (in either orientation).
        ``node_count`` defaults to max node id + 1.
        """
        arr = np.asarray(list(edges), dtype=np.int64)
        if arr.size == 0:
            if node_count is None:
                node_count = 0
            empty = np.zeros(0, dtype=np.int64)
            return cls(np.zeros(node_count + 1, dtype=np.int64), empty)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("edges must be (u, v) pairs")
        if arr.min() < 0:
            raise ValueError("negative node id")
        if np.any(arr[:, 0] == arr[:, 1]):
            raise ValueError("self-loop in edge list")
        lo = arr.min(axis=1)
        hi = arr.max(axis=1)
        keys = lo * (hi.max() + 1) + hi
        if np.unique(keys).size != keys.size:
            raise ValueError("duplicate edge in edge list")
        n = int(hi.max()) + 1
        if node_count is not None:
            if node_count < n:
                raise ValueError("node_count smaller than max node id + 1")
            n = node_count
        return cls._from_half_edges(lo, hi, n)

    @classmethod
    def _from_half_edges(cls, lo: np.ndarray, hi: np.ndarray, n: int) -> "Graph":
        # lo < hi, already deduplicated; mirror and sort into CSR.
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        src = src[order]
        dst = dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(indptr, dst)

    @property
    def node_count(self) -> int:
        return len(self._indptr) - 1

    @property
    def edge_count(self) -> int:
        return len(self._indices) // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self._indptr)

    def neighbors(self, u: int) -> np.ndarray:
        """Sorted neighbor ids of ``u``."""
        return self._indices[self._indptr[u] : self._indptr[u + 1]]

    def edges(self) -> Iterator[tuple[int, int]]:
        """Undirected edges as (u, v) pairs with u < v, in sorted order."""
        for u in range(self.node_count):
            for v in self.neighbors(u):
                if u < v:
                    yield (u, int(v))

    def edge_array(self) -> np.ndarray:
        """All (u, v) pairs with u < v as an (E, 2) array, lexicographically sorted."""
        src = np.repeat(np.arange(self.node_count, dtype=np.int64), self.degrees)
        mask = src < self._indices
        return np.column_stack([src[mask], self._indices[mask]])

    def to_csr(self) -> sparse.csr_matrix:
        data = np.ones(len(self._indices), dtype=np.float64)
        n = self.node_count
        return sparse.csr_matrix(
            (data, self._indices.copy(), self._indptr.copy()), shape=(n, n)
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return np.array_equal(self._indptr, other._indptr) and np.array_equal(
            self._indices, other._indices
        )

    def __hash__(self) -> int:
        return hash((self._indptr.tobytes(), self._indices.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.node_count}, e={self.edge_count})"


def largest_connected_component(g: Graph) -> Graph:
    """Induced subgraph on the largest component, nodes relabeled to 0..k-1.

    Size ties are broken in favor of the component containing the smallest
    original node id. Relabeling preserves the original id order.
    """
    if g.node_count == 0:
        raise ValueError("empty graph")
    n_comp, labels = csgraph.connected_components(g.to_csr(), directed=False)
    if n_comp == 1:
        return g
    sizes = np.bincount(labels, minlength=n_comp)
    best = sizes.max()
    # first node (= smallest id) whose component has maximal size
    winner = labels[np.argmax(sizes[labels] == best)]
    keep = np.flatnonzero(labels == winner)
    relabel = np.full(g.node_count, -1, dtype=np.int64)
    relabel[keep] = np.arange(len(keep), dtype=np.int64)
    pairs = g.edge_array()
    mask = (relabel[pairs[:, 0]] >= 0) & (relabel[pairs[:, 1]] >= 0)
    pairs = relabel[pairs[mask]]
    lo = pairs.min(axis=1)
    hi = pairs.max(axis=1)
    return Graph._from_half_edges(lo, hi, len(keep))


def mean_local_clustering(g: Graph, block_work: int = 4_000_000) -> float:
    """Mean of local clustering coefficients.

    c_v = 2 T(v) / (deg(v) (deg(v)-1)) for deg(v) >= 2, else 0, where T(v)
    counts triangles through v. Computed as row sums of (A @ A) * A, blocked
    by rows so the intermediate product stays memory-bounded on large skewed
    graphs.
    """
    n = g.node_count
    if n == 0:
        raise ValueError("empty graph")
    deg = g.degrees.astype(np.float64)
    adj = g.to_csr()
    # per-row product cost: sum of neighbor degrees
    row_work = np.asarray(adj @ deg, dtype=np.float64)
    common = np.zeros(n, dtype=np.float64)
    start = 0
    while start < n:
        stop = start + 1
        acc = row_work[start]
        while stop < n and acc + row_work[stop] <= block_work:
            acc += row_work[stop]
            stop += 1
        block = adj[start:stop]
        prod = (block @ adj).multiply(block)
        common[start:stop] = np.asarray(prod.sum(axis=1)).ravel()
        start = stop
    coeff = np.zeros(n, dtype=np.float64)
    mask = deg >= 2
    coeff[mask] = common[mask] / (deg[mask] * (deg[mask] - 1.0))
    return float(coeff.mean())


def metric_projection(g: Graph) -> MetricPoint:
    """Metric-space coordinates of a connected graph with at least 2 nodes."""
    n = g.node_count
    if n < 2:
        raise ValueError("degenerate graph")
    density = 2.0 * g.edge_count / (n * (n - 1.0))
    return MetricPoint(clustering=mean_local_clustering(g), dlog=math.log10(density))
