"""Histogram grids over metric and parameter space, and the conditional model.

The conditional model is the bridge between the two spaces.  It is built from
a baseline sample of (unit parameter point, metric point) pairs and stores
sparse counts: n_i records per observed parameter cell i and n_ij records per
(parameter cell, metric cell) pair.  A candidate parameter distribution q is
scored by pushing its per-cell mass through the conditional rows:

    P_j = sum_i (n_ij / n_i) * mass_i(q)

Only observed parameter cells contribute, so the total pushed mass (the
coverage) is less than 1; predictions renormalize and report it separately.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import DataError
from .graph import MetricPoint
from .params import QVector, UnitPoint, beta_cdf

__all__ = [
    "MetricGrid",
    "ParamGrid",
    "ParamCell",
    "ConditionalModel",
    "Prediction",
    "build_conditional",
    "conditional_from_pairs",
    "predicted_mass",
    "predict_metric_distribution",
    "empirical_metric_distribution",
    "metric_histogram",
    "save_conditional",
    "load_conditional",
]

logger = logging.getLogger(__name__)

_MODEL_MAGIC = "graphbargain-model"
_MODEL_VERSION = "v1"

# Predictions with less pushed mass than this are meaningless noise.
MIN_COVERAGE = 1e-6


@dataclass(frozen=True)
class MetricGrid:
    """Regular grid over (clustering, dlog) space, row-major in clustering."""

    clustering_bins: int = 10
    dlog_bins: int = 10
    dlog_min: float = -6.0
    dlog_max: float = 0.0

    def __post_init__(self) -> None:
        if self.clustering_bins < 1 or self.dlog_bins < 1:
            raise ValueError("grid needs at least one bin per axis")
        if not self.dlog_min < self.dlog_max:
            raise ValueError("dlog_min must be below dlog_max")

    @property
    def cell_count(self) -> int:
        return self.clustering_bins * self.dlog_bins

    def locate(self, point: MetricPoint) -> int:
        """Flat cell index for a metric point.

        Upper edges fold into the last bin; dlog below the grid minimum is
        clamped into the first dlog bin with a warning.
        """
        c = point.clustering
        if not 0.0 <= c <= 1.0:
            raise ValueError(f"clustering {c} outside [0, 1]")
        c_bin = min(int(c * self.clustering_bins), self.clustering_bins - 1)
        d = point.dlog
        if d < self.dlog_min:
            logger.warning("dlog %.6g below grid minimum %g; clamped into first bin", d, self.dlog_min)
            d = self.dlog_min
        width = (self.dlog_max - self.dlog_min) / self.dlog_bins
        d_bin = min(int((d - self.dlog_min) / width), self.dlog_bins - 1)
        d_bin = max(d_bin, 0)
        return c_bin * self.dlog_bins + d_bin


@dataclass(frozen=True)
class ParamCell:
    """Axis-aligned box in unit parameter space, coordinates ordered (N, a, b, c)."""

    lower: tuple[float, float, float, float]
    upper: tuple[float, float, float, float]


@dataclass(frozen=True)
class ParamGrid:
    """Regular grid over the unit hypercube of normalized parameters."""

    bins: int = 20

    def __post_init__(self) -> None:
        if self.bins < 1:
            raise ValueError("grid needs at least one bin per axis")

    @property
    def cell_count(self) -> int:
        return self.bins**4

    def locate(self, u: UnitPoint) -> tuple[int, int, int, int]:
        coords = (u.u_n, u.u_a, u.u_b, u.u_c)
        out = []
        for x in coords:
            if not 0.0 <= x <= 1.0:
                raise ValueError(f"unit coordinate {x} outside [0, 1]")
            out.append(min(int(x * self.bins), self.bins - 1))
        return tuple(out)

    def flatten(self, bins4: tuple[int, int, int, int]) -> int:
        bn, ba, bb, bc = bins4
        for b in (bn, ba, bb, bc):
            if not 0 <= b < self.bins:
                raise ValueError(f"bin index {b} outside [0, {self.bins})")
        return ((bn * self.bins + ba) * self.bins + bb) * self.bins + bc

    def unflatten(self, index: int) -> tuple[int, int, int, int]:
        if not 0 <= index < self.cell_count:
            raise ValueError(f"cell index {index} outside [0, {self.cell_count})")
        rest, bc = divmod(index, self.bins)
        rest, bb = divmod(rest, self.bins)
        bn, ba = divmod(rest, self.bins)
        return (bn, ba, bb, bc)

    def cell(self, bins4: tuple[int, int, int, int]) -> ParamCell:
        self.flatten(bins4)  # range check
        lower = tuple(b / self.bins for b in bins4)
        upper = tuple((b + 1) / self.bins for b in bins4)
        return ParamCell(lower=lower, upper=upper)


@dataclass(eq=False)
class ConditionalModel:
    """Sparse conditional counts linking parameter cells to metric cells.

    Arrays are parallel: ``cell_*`` index the K observed parameter cells
    (sorted by flat id), ``pair_*`` the P observed (cell, metric) pairs
    (sorted by flat id, then metric id).  ``pair_cell`` holds row indices
    into the cell arrays, not flat ids.
    """

    metric_grid: MetricGrid
    param_grid: ParamGrid
    total: int
    cell_flat: np.ndarray
    cell_bins: np.ndarray
    cell_counts: np.ndarray
    pair_cell: np.ndarray
    pair_metric: np.ndarray
    pair_counts: np.ndarray

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConditionalModel):
            return NotImplemented
        return (
            self.metric_grid == other.metric_grid
            and self.param_grid == other.param_grid
            and self.total == other.total
            and all(
                np.array_equal(getattr(self, name), getattr(other, name))
                for name in ("cell_flat", "cell_bins", "cell_counts", "pair_cell", "pair_metric", "pair_counts")
            )
        )


def conditional_from_pairs(
    metric_grid: MetricGrid,
    param_grid: ParamGrid,
    flat: np.ndarray,
    metric: np.ndarray,
    counts: np.ndarray,
) -> ConditionalModel:
    """Assemble a model from raw (flat cell id, metric cell id, count) triples.

    Duplicate (cell, metric) keys are merged, zero counts dropped.
    """
    flat = np.asarray(flat, dtype=np.int64)
    metric = np.asarray(metric, dtype=np.int64)
    counts = np.asarray(counts, dtype=np.int64)
    if not flat.shape == metric.shape == counts.shape or flat.ndim != 1:
        raise ValueError("pair arrays must be 1-d and the same length")
    if np.any(counts < 0):
        raise ValueError("negative pair count")
    keep = counts > 0
    flat, metric, counts = flat[keep], metric[keep], counts[keep]
    if flat.size == 0:
        raise ValueError("model has no records")
    if np.any(flat < 0) or np.any(flat >= param_grid.cell_count):
        raise ValueError("parameter cell id outside grid")
    if np.any(metric < 0) or np.any(metric >= metric_grid.cell_count):
        raise ValueError("metric cell id outside grid")

    order = np.lexsort((metric, flat))
    flat, metric, counts = flat[order], metric[order], counts[order]
    fresh = np.ones(flat.size, dtype=bool)
    fresh[1:] = (flat[1:] != flat[:-1]) | (metric[1:] != metric[:-1])
    group = np.cumsum(fresh) - 1
    pair_counts = np.bincount(group, weights=counts).astype(np.int64)
    pair_flat = flat[fresh]
    pair_metric = metric[fresh]

    cell_flat, pair_cell = np.unique(pair_flat, return_inverse=True)
    cell_counts = np.bincount(pair_cell, weights=pair_counts).astype(np.int64)
    rest, bc = np.divmod(cell_flat, param_grid.bins)
    rest, bb = np.divmod(rest, param_grid.bins)
    bn, ba = np.divmod(rest, param_grid.bins)
    cell_bins = np.column_stack([bn, ba, bb, bc])

    return ConditionalModel(
        metric_grid=metric_grid,
        param_grid=param_grid,
        total=int(pair_counts.sum()),
        cell_flat=cell_flat,
        cell_bins=cell_bins,
        cell_counts=cell_counts,
        pair_cell=pair_cell.astype(np.int64),
        pair_metric=pair_metric,
        pair_counts=pair_counts,
    )


def build_conditional(
    records: Iterable[tuple[UnitPoint, MetricPoint]],
    metric_grid: MetricGrid | None = None,
    param_grid: ParamGrid | None = None,
) -> ConditionalModel:
    """Count (parameter cell, metric cell) co-occurrences over baseline records."""
    metric_grid = metric_grid or MetricGrid()
    param_grid = param_grid or ParamGrid()
    counts: dict[tuple[int, int], int] = {}
    for u, point in records:
        i = param_grid.flatten(param_grid.locate(u))
        j = metric_grid.locate(point)
        counts[i, j] = counts.get((i, j), 0) + 1
    if not counts:
        raise ValueError("model has no records")
    keys = np.array(sorted(counts), dtype=np.int64)
    vals = np.array([counts[i, j] for i, j in keys], dtype=np.int64)
    return conditional_from_pairs(metric_grid, param_grid, keys[:, 0], keys[:, 1], vals)


def _dim_masses(q: QVector, bins: int) -> np.ndarray:
    """Per-axis Beta mass in each of the shared unit bins, shape (4, bins)."""
    edges = np.linspace(0.0, 1.0, bins + 1)
    return np.vstack([np.diff(beta_cdf(edges, spec)) for spec in q.specs])


def predicted_mass(model: ConditionalModel, q: QVector) -> tuple[np.ndarray, float]:
    """Raw pushed metric mass (not normalized) and the coverage it sums to."""
    dim = _dim_masses(q, model.param_grid.bins)
    cb = model.cell_bins
    cellmass = dim[0][cb[:, 0]] * dim[1][cb[:, 1]] * dim[2][cb[:, 2]] * dim[3][cb[:, 3]]
    coverage = float(cellmass.sum())
    weights = (model.pair_counts / model.cell_counts[model.pair_cell]) * cellmass[model.pair_cell]
    raw = np.bincount(model.pair_metric, weights=weights, minlength=model.metric_grid.cell_count)
    return raw, coverage


@dataclass(frozen=True)
class Prediction:
    """Renormalized metric distribution plus the coverage before renormalization."""

    probabilities: np.ndarray = field(repr=False)
    coverage: float


def predict_metric_distribution(model: ConditionalModel, q: QVector) -> Prediction:
    raw, coverage = predicted_mass(model, q)
    if coverage < MIN_COVERAGE:
        raise ValueError(f"q mass outside observed region (coverage {coverage:.3g})")
    return Prediction(probabilities=raw / raw.sum(), coverage=coverage)


def empirical_metric_distribution(model: ConditionalModel) -> np.ndarray:
    """Prediction pipeline with cell masses replaced by observed frequencies.

    Must reproduce the plain metric histogram; kept as a separate code path
    on purpose so the identity stays checkable.
    """
    cellmass = model.cell_counts / model.total
    weights = (model.pair_counts / model.cell_counts[model.pair_cell]) * cellmass[model.pair_cell]
    return np.bincount(model.pair_metric, weights=weights, minlength=model.metric_grid.cell_count)


def metric_histogram(model: ConditionalModel) -> np.ndarray:
    """Observed metric distribution n_j / n."""
    raw = np.bincount(model.pair_metric, weights=model.pair_counts, minlength=model.metric_grid.cell_count)
    return raw / model.total


def save_conditional(model: ConditionalModel, path: str | Path) -> None:
    lines = [
        f"{_MODEL_MAGIC} {_MODEL_VERSION}",
        f"metric_grid {model.metric_grid.clustering_bins} {model.metric_grid.dlog_bins} "
        f"{model.metric_grid.dlog_min!r} {model.metric_grid.dlog_max!r}",
        f"param_grid {model.param_grid.bins}",
        f"total {model.total}",
        f"pairs {model.pair_counts.size}",
    ]
    flat = model.cell_flat[model.pair_cell]
    for i, j, c in zip(flat, model.pair_metric, model.pair_counts):
        lines.append(f"{i} {j} {c}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def _header_fields(line: str, lineno: int, name: str, count: int, path: Path) -> list[str]:
    parts = line.split()
    if len(parts) != count + 1 or parts[0] != name:
        raise DataError(f"{path}:{lineno}: expected '{name}' header line, got {line!r}")
    return parts[1:]


def load_conditional(path: str | Path) -> ConditionalModel:
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except OSError as exc:
        raise DataError(f"cannot read model file {path}: {exc}") from exc
    lines = text.splitlines()
    if len(lines) < 5:
        raise DataError(f"{path}: truncated model file")
    if lines[0].split() != [_MODEL_MAGIC, _MODEL_VERSION]:
        raise DataError(f"{path}:1: bad magic line {lines[0]!r}")
    try:
        mg = _header_fields(lines[1], 2, "metric_grid", 4, path)
        metric_grid = MetricGrid(int(mg[0]), int(mg[1]), float(mg[2]), float(mg[3]))
        pg = _header_fields(lines[2], 3, "param_grid", 1, path)
        param_grid = ParamGrid(int(pg[0]))
        total = int(_header_fields(lines[3], 4, "total", 1, path)[0])
        pairs = int(_header_fields(lines[4], 5, "pairs", 1, path)[0])
    except ValueError as exc:
        raise DataError(f"{path}: bad header: {exc}") from exc
    body = lines[5:]
    if len(body) != pairs:
        raise DataError(f"{path}: expected {pairs} pair lines, found {len(body)}")
    flat = np.empty(pairs, dtype=np.int64)
    metric = np.empty(pairs, dtype=np.int64)
    counts = np.empty(pairs, dtype=np.int64)
    for k, line in enumerate(body):
        parts = line.split()
        if len(parts) != 3:
            raise DataError(f"{path}:{k + 6}: expected 'cell metric count', got {line!r}")
        try:
            flat[k], metric[k], counts[k] = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError as exc:
            raise DataError(f"{path}:{k + 6}: {exc}") from exc
    try:
        model = conditional_from_pairs(metric_grid, param_grid, flat, metric, counts)
    except ValueError as exc:
        raise DataError(f"{path}: inconsistent model: {exc}") from exc
    if model.total != total:
        raise DataError(f"{path}: header total {total} != sum of counts {model.total}")
    return model
