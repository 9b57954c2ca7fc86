"""File formats: edge lists, MatrixMarket adjacency input, manifests, stats.

All text output is ASCII with floats rendered via repr(), so files are
byte-identical across runs and round-trip without precision loss.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable

import numpy as np
import scipy.io

from .errors import DataError
from .graph import Graph, MetricPoint
from .params import BetaSpec, QVector, UnitPoint, unit_point
from .rmat import RmatParams, VanishedGraphError, sanitize

__all__ = [
    "MANIFEST_HEADER",
    "ManifestRow",
    "SummaryStats",
    "write_edge_list",
    "read_edge_list",
    "read_matrix_market",
    "write_manifest",
    "read_manifest",
    "write_qvector",
    "read_qvector",
    "compute_stats",
    "emit_scatter_csv",
]

_Q_KEYS = ("alpha_n", "beta_n", "alpha_a", "beta_a", "alpha_b", "beta_b", "alpha_c", "beta_c")

MANIFEST_HEADER = "id,seed,n_param,e_param,a,b,c,d,u_n,u_a,u_b,u_c,n_final,e_final,clustering,dlog"

_MM_FIELDS = {"pattern", "real", "integer", "complex"}
_MM_SYMMETRIES = {"general", "symmetric", "skew-symmetric", "hermitian"}


def write_edge_list(g: Graph, path: str | Path) -> None:
    """One 'u v' pair per line, u < v, lexicographically sorted."""
    with open(path, "w", encoding="ascii") as fh:
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")


def read_edge_list(path: str | Path) -> Graph:
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except OSError as exc:
        raise DataError(f"cannot read edge list {path}: {exc}") from exc
    us: list[int] = []
    vs: list[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise DataError(f"{path}:{lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from exc
        if u < 0 or v < 0:
            raise DataError(f"{path}:{lineno}: negative node id")
        us.append(u)
        vs.append(v)
    if not us:
        raise DataError(f"{path}: no edges")
    try:
        return Graph.from_edge_list(np.column_stack([us, vs]))
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


def read_matrix_market(path: str | Path) -> Graph:
    """Read a square sparse matrix and clean its structure into a graph.

    Keeps the off-diagonal pattern only: self-loops dropped, direction and
    values ignored, then the largest connected component is extracted.
    """
    path = Path(path)
    try:
        with open(path, encoding="ascii", errors="replace") as fh:
            banner = fh.readline().split()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if len(banner) != 5 or banner[0] != "%%MatrixMarket":
        raise DataError(f"{path}:1: not a MatrixMarket file")
    obj, fmt, field_kind, symmetry = (tok.lower() for tok in banner[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise DataError(f"{path}:1: need a coordinate matrix, got {obj} {fmt}")
    if field_kind not in _MM_FIELDS:
        raise DataError(f"{path}:1: unknown field type {field_kind!r}")
    if symmetry not in _MM_SYMMETRIES:
        raise DataError(f"{path}:1: unknown symmetry {symmetry!r}")
    try:
        mat = scipy.io.mmread(str(path)).tocoo()
    except (OSError, ValueError) as exc:
        raise DataError(f"{path}: {exc}") from exc
    rows, cols = mat.shape
    if rows != cols:
        raise DataError(f"{path}: adjacency matrix must be square, got {rows}x{cols}")
    edges = np.column_stack([mat.row.astype(np.int64), mat.col.astype(np.int64)])
    try:
        return sanitize(edges, rows)
    except (VanishedGraphError, ValueError) as exc:
        raise DataError(f"{path}: no usable off-diagonal structure ({exc})") from exc


@dataclass(frozen=True)
class ManifestRow:
    """One generated graph: its recipe, seed, and measured outcome."""

    id: int
    seed: int
    n_param: int
    e_param: int
    a: float
    b: float
    c: float
    d: float
    u_n: float
    u_a: float
    u_b: float
    u_c: float
    n_final: int
    e_final: int
    clustering: float
    dlog: float

    @classmethod
    def build(
        cls, id: int, seed: int, params: RmatParams, n_final: int, e_final: int, metric: MetricPoint
    ) -> "ManifestRow":
        u = unit_point(params)
        return cls(
            id=id,
            seed=seed,
            n_param=params.n_param,
            e_param=params.e_param,
            a=params.a,
            b=params.b,
            c=params.c,
            d=params.d,
            u_n=u.u_n,
            u_a=u.u_a,
            u_b=u.u_b,
            u_c=u.u_c,
            n_final=n_final,
            e_final=e_final,
            clustering=metric.clustering,
            dlog=metric.dlog,
        )

    @property
    def params(self) -> RmatParams:
        return RmatParams(self.n_param, self.e_param, self.a, self.b, self.c, self.d)

    @property
    def unit(self) -> UnitPoint:
        return UnitPoint(self.u_n, self.u_a, self.u_b, self.u_c)

    @property
    def metric(self) -> MetricPoint:
        return MetricPoint(self.clustering, self.dlog)


_ROW_FIELDS = [(f.name, f.type) for f in fields(ManifestRow)]


def _format_value(value: object) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_manifest(rows: Iterable[ManifestRow], path: str | Path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(MANIFEST_HEADER + "\n")
        for row in rows:
            fh.write(",".join(_format_value(getattr(row, name)) for name, _ in _ROW_FIELDS) + "\n")


def read_manifest(path: str | Path) -> list[ManifestRow]:
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except OSError as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from exc
    lines = text.splitlines()
    if not lines:
        raise DataError(f"{path}: empty manifest")
    if lines[0] != MANIFEST_HEADER:
        raise DataError(f"{path}:1: bad header {lines[0]!r}")
    rows: list[ManifestRow] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(_ROW_FIELDS):
            raise DataError(f"{path}:{lineno}: expected {len(_ROW_FIELDS)} fields, got {len(parts)}")
        values: dict[str, object] = {}
        try:
            for (name, kind), token in zip(_ROW_FIELDS, parts):
                values[name] = int(token) if kind == "int" else float(token)
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from exc
        rows.append(ManifestRow(**values))
    if not rows:
        raise DataError(f"{path}: manifest has no rows")
    return rows


def write_qvector(q: QVector, path: str | Path, extra: dict[str, object] | None = None) -> None:
    """Persist a Beta parameter vector as flat key=value text."""
    lines = [f"{key} = {float(value)!r}" for key, value in zip(_Q_KEYS, q.as_array())]
    for key, value in (extra or {}).items():
        lines.append(f"{key} = {_format_value(value)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_qvector(path: str | Path) -> QVector:
    """Read a q vector back; unknown keys are ignored as metadata."""
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except OSError as exc:
        raise DataError(f"cannot read q vector {path}: {exc}") from exc
    values: dict[str, float] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            raise DataError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key = key.strip()
        if key in _Q_KEYS:
            try:
                values[key] = float(value.strip())
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
    missing = [key for key in _Q_KEYS if key not in values]
    if missing:
        raise DataError(f"{path}: missing keys: {', '.join(missing)}")
    try:
        return QVector(
            q_n=BetaSpec(values["alpha_n"], values["beta_n"]),
            q_a=BetaSpec(values["alpha_a"], values["beta_a"]),
            q_b=BetaSpec(values["alpha_b"], values["beta_b"]),
            q_c=BetaSpec(values["alpha_c"], values["beta_c"]),
        )
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class SummaryStats:
    """Descriptive statistics of a metric-point cloud.

    correlation is None when either coordinate is constant (the population
    standard deviation vanishes and the ratio is undefined).
    """

    count: int
    mean_clustering: float
    mean_dlog: float
    max_clustering: float
    correlation: float | None


def compute_stats(points: Iterable[MetricPoint]) -> SummaryStats:
    arr = np.array([[p.clustering, p.dlog] for p in points], dtype=np.float64)
    if arr.size == 0:
        raise ValueError("no points")
    c, d = arr[:, 0], arr[:, 1]
    correlation: float | None = None
    if len(arr) >= 2:
        # population moments (ddof 0)
        sc, sd = c.std(), d.std()
        if sc > 0.0 and sd > 0.0:
            cov = float(np.mean((c - c.mean()) * (d - d.mean())))
            correlation = cov / (sc * sd)
    return SummaryStats(
        count=len(arr),
        mean_clustering=float(c.mean()),
        mean_dlog=float(d.mean()),
        max_clustering=float(c.max()),
        correlation=correlation,
    )


def emit_scatter_csv(points: Iterable[MetricPoint], path: str | Path) -> None:
    """Two-column CSV of the metric cloud, ready for plotting."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("clustering,dlog\n")
        for p in points:
            fh.write(f"{p.clustering!r},{p.dlog!r}\n")
