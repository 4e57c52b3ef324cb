"""Per-graph feature assembly, standardization, selection, and CSV export.

A feature matrix has one row per graph and a column for every configured
attribute/time pair (`deg@2`, `id@0`, ...), per-vertex one-hot covariances in
fixed-vertex mode (`v17@3`), and the global node/edge counts last. Column
order is a pure function of the configuration, so identical runs export
byte-identical CSVs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import attributes as attr_mod
from .dynamics import (
    DEFAULT_TIME_GRID,
    build_walk_operator,
    categorical_assortativity,
    numeric_assortativity,
    time_grid,
    vertex_autocovariance_profile,
)
from .errors import ArgumentError, ConvergenceError, FormatError
from .graphs import Dataset, Graph, binarize

ATTRIBUTE_ORDER = (
    "degree",
    "second_eigenvector",
    "clustering",
    "betweenness",
    "triangles",
    "identity_partition",
    "node_labels",
)

SHORT_NAMES = {
    "degree": "deg",
    "second_eigenvector": "eig2",
    "clustering": "clust",
    "betweenness": "btw",
    "triangles": "tri",
    "identity_partition": "id",
    "node_labels": "lab",
}

GLOBAL_COLUMNS = ("num_nodes", "num_edges")

BIO_ATTRIBUTES = ("degree", "second_eigenvector", "clustering",
                  "identity_partition", "node_labels")
SOCIAL_ATTRIBUTES = ("degree", "second_eigenvector", "clustering",
                     "betweenness", "triangles", "identity_partition")


@dataclass(frozen=True)
class FeatureConfig:
    """Which attributes, times, and extras make up a feature vector."""

    attributes: tuple[str, ...]
    ts: tuple[int, ...] = DEFAULT_TIME_GRID
    include_globals: bool = True
    fixed_vertex_mode: bool = False
    use_weights: bool = True
    selection: str = "all"

    def __post_init__(self):
        unknown = set(self.attributes) - set(ATTRIBUTE_ORDER)
        if unknown:
            raise ArgumentError(f"unknown attributes: {sorted(unknown)}")
        object.__setattr__(self, "attributes", tuple(
            a for a in ATTRIBUTE_ORDER if a in self.attributes))
        object.__setattr__(self, "ts", time_grid(self.ts))
        if not (self.attributes or self.include_globals or self.fixed_vertex_mode):
            raise ArgumentError("config selects no features at all")
        if self.selection not in ("all", "greedy_forward"):
            raise ArgumentError(f"unknown selection mode {self.selection!r}")


def bio_default_config() -> FeatureConfig:
    return FeatureConfig(attributes=BIO_ATTRIBUTES)


def social_default_config() -> FeatureConfig:
    return FeatureConfig(attributes=SOCIAL_ATTRIBUTES)


def parse_config(path: str | Path) -> FeatureConfig:
    """Read a `key = value` config file mirroring FeatureConfig fields."""
    fields: dict = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "attributes":
            fields[key] = tuple(v.strip() for v in value.split(",") if v.strip())
        elif key == "ts":
            try:
                fields[key] = tuple(int(v) for v in value.split(","))
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: bad time grid") from exc
        elif key in ("include_globals", "fixed_vertex_mode", "use_weights"):
            if value.lower() not in ("true", "false"):
                raise FormatError(f"{path}:{lineno}: expected true/false for {key}")
            fields[key] = value.lower() == "true"
        elif key == "selection":
            fields[key] = value
        else:
            raise FormatError(f"{path}:{lineno}: unknown config key {key!r}")
    fields.setdefault("attributes", ())
    return FeatureConfig(**fields)


@dataclass(frozen=True)
class FeatureMatrix:
    """Rectangular feature table over a dataset, with per-row flags."""

    column_names: tuple[str, ...]
    values: np.ndarray                       # (graphs, features)
    graph_ids: tuple[str, ...]
    class_labels: np.ndarray
    degenerate_flags: tuple[frozenset, ...] = ()
    standardization: tuple[np.ndarray, np.ndarray] | None = None  # (mean, std)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).reshape(
            len(self.graph_ids), len(self.column_names))
        object.__setattr__(self, "values", values)
        object.__setattr__(
            self, "class_labels", np.asarray(self.class_labels, dtype=np.int64))
        if not self.degenerate_flags:
            object.__setattr__(
                self, "degenerate_flags",
                tuple(frozenset() for _ in self.graph_ids))
        if not np.all(np.isfinite(values)):
            raise ArgumentError("feature matrix contains non-finite values")

    @property
    def num_rows(self) -> int:
        return len(self.graph_ids)

    def select_columns(self, names: Sequence[str]) -> "FeatureMatrix":
        index = {name: i for i, name in enumerate(self.column_names)}
        cols = [index[name] for name in names]
        return FeatureMatrix(
            column_names=tuple(names),
            values=self.values[:, cols],
            graph_ids=self.graph_ids,
            class_labels=self.class_labels,
            degenerate_flags=self.degenerate_flags,
        )


def feature_columns(cfg: FeatureConfig, ds: Dataset) -> tuple[str, ...]:
    """Column names implied by a configuration, in canonical order."""
    cols = [f"{SHORT_NAMES[a]}@{t}" for a in cfg.attributes for t in cfg.ts]
    if cfg.fixed_vertex_mode:
        n = _shared_vertex_count(ds)
        cols += [f"v{k}@{t}" for k in range(n) for t in cfg.ts]
    if cfg.include_globals:
        cols += list(GLOBAL_COLUMNS)
    return tuple(cols)


def _shared_vertex_count(ds: Dataset) -> int:
    sizes = {g.n for g in ds.graphs}
    if len(sizes) != 1:
        raise ArgumentError(
            f"fixed-vertex mode requires all graphs to share a vertex count, got {sorted(sizes)}")
    return sizes.pop()


def _graph_row(g: Graph, cfg: FeatureConfig, universe) -> tuple[list[float], set]:
    g_eff = g if cfg.use_weights else binarize(g)
    walk = build_walk_operator(g_eff)
    values: list[float] = []
    flags: set = set()
    profile = None

    def vertex_profile():
        nonlocal profile
        if profile is None:
            profile = vertex_autocovariance_profile(walk, cfg.ts)
        return profile

    for name in cfg.attributes:
        col_names = [f"{SHORT_NAMES[name]}@{t}" for t in cfg.ts]
        if name == "identity_partition":
            values += [float(vertex_profile()[t].sum()) for t in cfg.ts]
        elif name == "node_labels":
            h = attr_mod.label_indicator(g_eff, universe).h
            r = categorical_assortativity(walk, h, cfg.ts)
            values += [r[t] for t in cfg.ts]
        elif name == "second_eigenvector":
            try:
                attr, _ = attr_mod.second_left_eigenvector(g_eff)
            except ConvergenceError:
                values += [0.0] * len(cfg.ts)
                flags.update(col_names)
                continue
            u = numeric_assortativity(walk, attr.v, cfg.ts)
            values += [u[t] for t in cfg.ts]
            if attr.degenerate:
                flags.update(col_names)
        else:
            attr = {
                "degree": attr_mod.degree_attribute,
                "clustering": attr_mod.local_clustering,
                "betweenness": attr_mod.betweenness,
                "triangles": attr_mod.triangles_per_node,
            }[name](g_eff)
            u = numeric_assortativity(walk, attr.v, cfg.ts)
            values += [u[t] for t in cfg.ts]
    if cfg.fixed_vertex_mode:
        per_vertex = vertex_profile()
        values += [float(per_vertex[t][k]) for k in range(g.n) for t in cfg.ts]
    if cfg.include_globals:
        values += [float(g.n), float(g.num_edges)]
    return values, flags


def _check_config(ds: Dataset, cfg: FeatureConfig) -> None:
    if "node_labels" in cfg.attributes and not ds.label_universe:
        raise ArgumentError(
            f"config requests node_labels but dataset {ds.name!r} has no node labels")


def extract_features(ds: Dataset, cfg: FeatureConfig, jobs: int = 1) -> FeatureMatrix:
    """Feature matrix for every graph of the dataset, in dataset order.

    With jobs > 1, rows are computed in a process pool; assembly follows
    dataset order regardless of completion order, so output is identical to
    the serial run.
    """
    _check_config(ds, cfg)
    if cfg.fixed_vertex_mode:
        _shared_vertex_count(ds)
    columns = feature_columns(cfg, ds)
    if jobs > 1 and ds.num_graphs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(
                _row_task, ((g, cfg, ds.label_universe) for g in ds.graphs),
                chunksize=max(1, ds.num_graphs // (jobs * 8))))
    else:
        results = [_graph_row(g, cfg, ds.label_universe) for g in ds.graphs]
    values = np.array([row for row, _ in results], dtype=np.float64).reshape(
        ds.num_graphs, len(columns))
    flags = tuple(frozenset(f) for _, f in results)
    return FeatureMatrix(
        column_names=columns,
        values=values,
        graph_ids=tuple(g.graph_id for g in ds.graphs),
        class_labels=ds.class_labels,
        degenerate_flags=flags,
    )


def _row_task(args):
    return _graph_row(*args)


def extract_fixed_vertex_features(ds: Dataset, cfg: FeatureConfig, jobs: int = 1) -> FeatureMatrix:
    """Feature matrix with one-hot per-vertex covariances appended.

    All graphs must share the same vertex set; feature `v{k}@{t}` is the
    lag-t covariance of the indicator of vertex k, giving n * len(ts)
    per-vertex columns besides the configured standard attributes.
    """
    return extract_features(ds, replace(cfg, fixed_vertex_mode=True), jobs=jobs)


def fit_standardizer(
    fm: FeatureMatrix, train_idx: Sequence[int], access_log=None
) -> FeatureMatrix:
    """Standardize all rows using per-column stats of the training rows only.

    Population (divisor n) standard deviation; zero-variance columns pass
    through unchanged. The optional access_log records which rows the fit
    touched, for leakage auditing.
    """
    train_idx = np.asarray(train_idx, dtype=np.int64)
    if len(train_idx) == 0:
        raise ArgumentError("training index set must be non-empty")
    if access_log is not None:
        access_log.record("standardizer_fit", train_idx)
    train = fm.values[train_idx]
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    scaled = fm.values.copy()
    nonzero = std > 0
    scaled[:, nonzero] = (scaled[:, nonzero] - mean[nonzero]) / std[nonzero]
    return FeatureMatrix(
        column_names=fm.column_names,
        values=scaled,
        graph_ids=fm.graph_ids,
        class_labels=fm.class_labels,
        degenerate_flags=fm.degenerate_flags,
        standardization=(mean, std),
    )


def attribute_groups(column_names: Sequence[str]) -> dict[str, list[str]]:
    """Group feature columns by attribute: all `a@t` columns move as a unit.

    Per-vertex columns form a single "vertex" group and the global counts a
    "globals" group. Groups are returned in canonical column order.
    """
    groups: dict[str, list[str]] = {}
    for name in column_names:
        if name in GLOBAL_COLUMNS:
            key = "globals"
        elif "@" in name:
            prefix = name.split("@", 1)[0]
            key = "vertex" if prefix.startswith("v") and prefix[1:].isdigit() else prefix
        else:
            key = name
        groups.setdefault(key, []).append(name)
    return groups


def greedy_forward_selection(
    fm: FeatureMatrix,
    labels: np.ndarray,
    model_spec,
    folds: int = 5,
    seed: int = 0,
) -> tuple[str, ...]:
    """Greedily pick attribute groups by cross-validated accuracy.

    Adds the group improving CV accuracy the most, stopping once no addition
    gains more than 0.001; ties go to the earlier group in canonical order.
    Deterministic given the seed.
    """
    from .classify import cross_validate

    groups = attribute_groups(fm.column_names)
    if len(groups) < 1:
        raise ArgumentError("no attribute groups to select from")
    remaining = list(groups)
    selected: list[str] = []
    best_acc = 0.0
    while remaining:
        scored = []
        for name in remaining:
            cols = [c for g in selected + [name] for c in groups[g]]
            report = cross_validate(
                fm.select_columns(cols), labels, model_spec,
                folds=folds, repeats=1, seed=seed)
            scored.append((report.mean_accuracy, name))
        top_acc = max(acc for acc, _ in scored)
        winner = next(name for acc, name in scored if acc == top_acc)
        if top_acc <= best_acc + 0.001:
            break
        selected.append(winner)
        remaining.remove(winner)
        best_acc = top_acc
    return tuple(selected)


# ---------------------------------------------------------------------------
# CSV round trip
# ---------------------------------------------------------------------------

def export_csv(fm: FeatureMatrix, path: str | Path) -> None:
    """Write `graph_id,class,<features...>` rows; floats keep full precision."""
    lines = [",".join(("graph_id", "class") + fm.column_names)]
    for i in range(fm.num_rows):
        row = [fm.graph_ids[i], str(int(fm.class_labels[i]))]
        row += [repr(float(x)) for x in fm.values[i]]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def import_csv(path: str | Path) -> FeatureMatrix:
    """Read a matrix written by export_csv; exact float round trip."""
    text = Path(path).read_text()
    lines = [line for line in text.splitlines() if line]
    if not lines:
        raise FormatError(f"{path}: empty feature CSV")
    header = lines[0].split(",")
    if header[:2] != ["graph_id", "class"]:
        raise FormatError(f"{path}: header must start with graph_id,class")
    columns = tuple(header[2:])
    ids, classes, rows = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(header):
            raise FormatError(f"{path}:{lineno}: wrong field count")
        ids.append(parts[0])
        try:
            classes.append(int(parts[1]))
            rows.append([float(x) for x in parts[2:]])
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: unparsable value") from exc
    values = np.array(rows, dtype=np.float64).reshape(len(ids), len(columns))
    return FeatureMatrix(
        column_names=columns,
        values=values,
        graph_ids=tuple(ids),
        class_labels=np.asarray(classes, dtype=np.int64),
    )
