"""Graph and dataset containers, loaders, diagnostics, and toy generators.

Graphs are undirected and weighted. Edges are stored once with u < v and a
strictly positive weight; self-loops are rejected at ingestion (the walk
operator may add synthetic ones later to repair isolated vertices).
"""

from __future__ import annotations

import collections
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import pandas as pd
import scipy.sparse as sp

from .errors import ArgumentError, FormatError, GenerationError

TOPOLOGY_KINDS = ("communities3", "ring", "clique", "erdos_renyi", "star", "regular")

ER_MAX_RETRIES = 100


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph with optional categorical node labels.

    edges is an (m, 2) int array with edges[i, 0] < edges[i, 1] and no
    duplicates; weights is the matching (m,) positive float array.
    node_labels, when present, holds one categorical id per vertex.
    Instances are immutable and safe to share across workers.
    """

    n: int
    edges: np.ndarray
    weights: np.ndarray
    node_labels: np.ndarray | None = None
    graph_id: str = ""

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "weights", weights)
        if self.n < 0:
            raise ArgumentError("vertex count must be non-negative")
        if len(edges) != len(weights):
            raise ArgumentError("edges and weights length mismatch")
        if len(edges):
            if edges.min() < 0 or edges.max() >= self.n:
                raise ArgumentError("edge endpoint out of range")
            if np.any(edges[:, 0] >= edges[:, 1]):
                raise ArgumentError("edges must satisfy u < v (no self-loops)")
            key = edges[:, 0] * self.n + edges[:, 1]
            if len(np.unique(key)) != len(key):
                raise ArgumentError("duplicate edges")
            if np.any(weights <= 0):
                raise ArgumentError("edge weights must be positive")
        if self.node_labels is not None:
            labels = np.asarray(self.node_labels, dtype=np.int64).reshape(-1)
            object.__setattr__(self, "node_labels", labels)
            if len(labels) != self.n:
                raise ArgumentError("one node label per vertex required")

    @property
    def num_edges(self) -> int:
        return len(self.weights)

    def strength(self) -> np.ndarray:
        """Sum of incident edge weights per vertex (no repair applied)."""
        s = np.zeros(self.n)
        np.add.at(s, self.edges[:, 0], self.weights)
        np.add.at(s, self.edges[:, 1], self.weights)
        return s

    def adjacency(self, weighted: bool = True) -> sp.csr_matrix:
        """Symmetric adjacency matrix, weighted or binarized."""
        w = self.weights if weighted else np.ones(self.num_edges)
        u, v = self.edges[:, 0], self.edges[:, 1]
        return sp.csr_matrix(
            (np.concatenate([w, w]), (np.concatenate([u, v]), np.concatenate([v, u]))),
            shape=(self.n, self.n),
        )


def from_edge_list(
    n: int,
    edges: Iterable[tuple[int, int, float]],
    node_labels: Sequence[int] | None = None,
    graph_id: str = "",
) -> Graph:
    """Build a Graph from (u, v, w) triples, normalizing to u < v."""
    us, vs, ws = [], [], []
    for u, v, w in edges:
        if u == v:
            raise ArgumentError(f"self-loop ({u},{u}) not allowed at ingestion")
        us.append(min(u, v))
        vs.append(max(u, v))
        ws.append(w)
    edge_arr = np.array([us, vs], dtype=np.int64).T.reshape(-1, 2)
    labels = None if node_labels is None else np.asarray(node_labels, dtype=np.int64)
    return Graph(n=n, edges=edge_arr, weights=np.asarray(ws, dtype=np.float64),
                 node_labels=labels, graph_id=graph_id)


def binarize(g: Graph) -> Graph:
    """Copy of g with all edge weights set to 1."""
    return Graph(n=g.n, edges=g.edges, weights=np.ones(g.num_edges),
                 node_labels=g.node_labels, graph_id=g.graph_id)


def relabel(g: Graph, perm: Sequence[int]) -> Graph:
    """Copy of g with vertex i renamed to perm[i]."""
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(g.n)):
        raise ArgumentError("perm must be a permutation of 0..n-1")
    mapped = perm[g.edges]
    u = np.minimum(mapped[:, 0], mapped[:, 1])
    v = np.maximum(mapped[:, 0], mapped[:, 1])
    order = np.lexsort((v, u))
    labels = None
    if g.node_labels is not None:
        labels = np.empty_like(g.node_labels)
        labels[perm] = g.node_labels
    return Graph(n=g.n, edges=np.column_stack([u, v])[order],
                 weights=g.weights[order], node_labels=labels, graph_id=g.graph_id)


@dataclass(frozen=True)
class Dataset:
    """Ordered collection of graphs with per-graph class labels.

    class_labels are dense ids 0..C-1; label_universe is the sorted set of
    node-label values seen anywhere in the dataset (empty when unlabeled).
    """

    name: str
    graphs: tuple[Graph, ...]
    class_labels: np.ndarray
    label_universe: tuple[int, ...] = field(default=())

    def __post_init__(self):
        labels = np.asarray(self.class_labels, dtype=np.int64).reshape(-1)
        object.__setattr__(self, "class_labels", labels)
        object.__setattr__(self, "graphs", tuple(self.graphs))
        if len(self.graphs) != len(labels):
            raise ArgumentError("one class label per graph required")
        universe = set(self.label_universe)
        for g in self.graphs:
            if g.node_labels is not None and not set(g.node_labels.tolist()) <= universe:
                raise ArgumentError("node label outside declared universe")

    @property
    def num_graphs(self) -> int:
        return len(self.graphs)

    @property
    def num_classes(self) -> int:
        return len(set(self.class_labels.tolist()))


@dataclass(frozen=True)
class GraphDiagnostics:
    connected: bool
    bipartite: bool
    isolated_vertex_count: int
    component_count: int


def diagnose(g: Graph) -> GraphDiagnostics:
    """BFS connectivity, 2-colorability, and isolated-vertex count."""
    adj = g.adjacency(weighted=False)
    indptr, indices = adj.indptr, adj.indices
    color = np.full(g.n, -1, dtype=np.int64)
    components = 0
    bipartite = True
    for start in range(g.n):
        if color[start] >= 0:
            continue
        components += 1
        color[start] = 0
        queue = collections.deque([start])
        while queue:
            u = queue.popleft()
            for v in indices[indptr[u]:indptr[u + 1]]:
                if color[v] < 0:
                    color[v] = color[u] ^ 1
                    queue.append(v)
                elif color[v] == color[u]:
                    bipartite = False
    degrees = np.diff(indptr)
    return GraphDiagnostics(
        connected=(components == 1),
        bipartite=bipartite,
        isolated_vertex_count=int(np.sum(degrees == 0)),
        component_count=components,
    )


# ---------------------------------------------------------------------------
# TU benchmark format
# ---------------------------------------------------------------------------

def load_tu_dataset(directory: str | Path, name: str) -> Dataset:
    """Load a benchmark dataset laid out in the standard TU text format.

    Expects `{name}_A.txt` (comma-separated 1-indexed arcs, undirected edges
    listed both ways), `{name}_graph_indicator.txt`, `{name}_graph_labels.txt`
    and optionally `{name}_node_labels.txt` / `{name}_edge_attributes.txt`.
    Arcs are deduplicated to undirected u < v form, vertices renumbered
    0-based per graph, class and node labels remapped to dense ids by sorted
    original value. Positive edge attributes become weights; self-loop arcs
    are discarded.
    """
    directory = Path(directory)
    paths = {
        key: directory / f"{name}_{key}.txt"
        for key in ("A", "graph_indicator", "graph_labels", "node_labels", "edge_attributes")
    }
    for key in ("A", "graph_indicator", "graph_labels"):
        if not paths[key].is_file():
            raise FormatError(f"missing mandatory file {paths[key]}")

    try:
        arcs = _read_int_table(paths["A"], 2)
        indicator = _read_int_table(paths["graph_indicator"], 1)[:, 0]
        raw_graph_labels = _read_int_table(paths["graph_labels"], 1)[:, 0]
    except ValueError as exc:
        raise FormatError(f"unparsable TU file under {directory}: {exc}") from exc

    num_vertices = len(indicator)
    num_graphs = len(raw_graph_labels)
    if num_graphs == 0:
        raise FormatError(f"{paths['graph_labels']} is empty")
    if indicator.min() < 1 or indicator.max() > num_graphs:
        raise FormatError("graph indicator references a graph outside 1..num_graphs")

    # 0-based vertex ids local to each graph, robust to non-contiguous grouping
    graph_of = indicator - 1
    order = np.argsort(graph_of, kind="stable")
    counts = np.bincount(graph_of, minlength=num_graphs)
    if np.any(counts == 0):
        raise FormatError("a graph id has no vertices in the indicator file")
    local = np.empty(num_vertices, dtype=np.int64)
    local[order] = np.arange(num_vertices) - np.repeat(
        np.concatenate([[0], np.cumsum(counts)[:-1]]), counts
    )

    if len(arcs) and (arcs.min() < 1 or arcs.max() > num_vertices):
        raise FormatError("arc endpoint outside the vertex range")
    a = arcs[:, 0] - 1
    b = arcs[:, 1] - 1
    if np.any(graph_of[a] != graph_of[b]):
        raise FormatError("arc connects vertices from different graphs")

    if paths["edge_attributes"].is_file():
        try:
            attr = _read_float_table(paths["edge_attributes"])[:, 0]
        except ValueError as exc:
            raise FormatError(f"unparsable edge attributes: {exc}") from exc
        if len(attr) != len(arcs):
            raise FormatError("edge attribute count does not match arc count")
        if np.any(attr <= 0):
            raise FormatError("non-positive edge attribute used as weight")
        arc_weights = attr
    else:
        arc_weights = np.ones(len(arcs))

    keep = a != b  # discard self-loop arcs
    a, b, arc_weights = a[keep], b[keep], arc_weights[keep]
    gid = graph_of[a]
    lu = np.minimum(local[a], local[b])
    lv = np.maximum(local[a], local[b])
    # deduplicate to undirected form, keeping the first listed weight
    triples = np.column_stack([gid, lu, lv])
    _, first_idx = np.unique(triples, axis=0, return_index=True)
    first_idx.sort()
    gid, lu, lv, w = gid[first_idx], lu[first_idx], lv[first_idx], arc_weights[first_idx]

    node_labels_per_graph: list[np.ndarray | None] = [None] * num_graphs
    universe: tuple[int, ...] = ()
    if paths["node_labels"].is_file():
        try:
            raw_node_labels = _read_int_table(paths["node_labels"], 1)[:, 0]
        except ValueError as exc:
            raise FormatError(f"unparsable node labels: {exc}") from exc
        if len(raw_node_labels) != num_vertices:
            raise FormatError("node label count does not match vertex count")
        remap = {val: i for i, val in enumerate(sorted(set(raw_node_labels.tolist())))}
        dense = np.array([remap[val] for val in raw_node_labels.tolist()], dtype=np.int64)
        universe = tuple(range(len(remap)))
        offsets = np.concatenate([[0], np.cumsum(counts)])
        for gi in range(num_graphs):
            members = order[offsets[gi]:offsets[gi + 1]]  # local ids ascending by construction
            node_labels_per_graph[gi] = dense[members]

    class_remap = {val: i for i, val in enumerate(sorted(set(raw_graph_labels.tolist())))}
    class_labels = np.array([class_remap[val] for val in raw_graph_labels.tolist()])

    edge_order = np.argsort(gid, kind="stable")
    gid, lu, lv, w = gid[edge_order], lu[edge_order], lv[edge_order], w[edge_order]
    starts = np.searchsorted(gid, np.arange(num_graphs))
    stops = np.searchsorted(gid, np.arange(num_graphs) + 1)

    graphs = []
    for gi in range(num_graphs):
        sl = slice(starts[gi], stops[gi])
        graphs.append(Graph(
            n=int(counts[gi]),
            edges=np.column_stack([lu[sl], lv[sl]]),
            weights=w[sl],
            node_labels=node_labels_per_graph[gi],
            graph_id=f"{name}_{gi}",
        ))
    return Dataset(name=name, graphs=tuple(graphs), class_labels=class_labels,
                   label_universe=universe)


def _read_int_table(path: Path, ncols: int) -> np.ndarray:
    if path.stat().st_size == 0:
        return np.empty((0, ncols), dtype=np.int64)
    frame = pd.read_csv(path, header=None, sep=",", skipinitialspace=True)
    return frame.to_numpy(dtype=np.int64).reshape(-1, frame.shape[1])


def _read_float_table(path: Path) -> np.ndarray:
    frame = pd.read_csv(path, header=None, sep=",", skipinitialspace=True)
    return frame.to_numpy(dtype=np.float64).reshape(len(frame), -1)


# ---------------------------------------------------------------------------
# Weighted edge-record format
# ---------------------------------------------------------------------------

def classes_sidecar(path: str | Path) -> Path:
    return Path(path).with_suffix(".classes")


def load_weighted_graphs(path: str | Path) -> Dataset:
    """Load a dataset of weighted graphs from `graph_id u v w` records.

    An optional `#n <int>` header fixes a shared vertex count; otherwise each
    graph uses 1 + its largest vertex index. A sidecar file (same path with a
    `.classes` suffix) of `graph_id class` lines defines the graph order and
    class labels; it must cover every graph that has edges.
    """
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"missing file {path}")
    sidecar = classes_sidecar(path)

    fixed_n: int | None = None
    records: dict[str, list[tuple[int, int, float]]] = collections.defaultdict(list)
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts and parts[0] == "n":
                try:
                    fixed_n = int(parts[1])
                except (IndexError, ValueError) as exc:
                    raise FormatError(f"{path}:{lineno}: bad '#n' header") from exc
            continue
        parts = line.split()
        if len(parts) != 4:
            raise FormatError(f"{path}:{lineno}: expected 'graph_id u v w'")
        gid, u_s, v_s, w_s = parts
        try:
            u, v, w = int(u_s), int(v_s), float(w_s)
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: unparsable record") from exc
        if w <= 0:
            raise FormatError(f"{path}:{lineno}: non-positive weight {w}")
        if u == v:
            raise FormatError(f"{path}:{lineno}: self-loop on vertex {u}")
        records[gid].append((min(u, v), max(u, v), w))

    if not sidecar.is_file():
        if not records:
            return Dataset(name=path.stem, graphs=(), class_labels=np.empty(0, dtype=np.int64))
        raise FormatError(f"missing class sidecar {sidecar}")

    graph_order: list[str] = []
    raw_classes: dict[str, int] = {}
    for lineno, line in enumerate(sidecar.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"{sidecar}:{lineno}: expected 'graph_id class'")
        gid, cls_s = parts
        if gid in raw_classes:
            raise FormatError(f"{sidecar}:{lineno}: duplicate graph id {gid}")
        try:
            raw_classes[gid] = int(cls_s)
        except ValueError as exc:
            raise FormatError(f"{sidecar}:{lineno}: unparsable class") from exc
        graph_order.append(gid)

    missing = set(records) - set(raw_classes)
    if missing:
        raise FormatError(f"graphs without a class entry: {sorted(missing)}")

    class_remap = {val: i for i, val in enumerate(sorted(set(raw_classes.values())))}
    graphs = []
    for gid in graph_order:
        triples = records.get(gid, [])
        seen = set()
        for u, v, _ in triples:
            if (u, v) in seen:
                raise FormatError(f"duplicate edge ({u},{v}) in graph {gid}")
            seen.add((u, v))
        if fixed_n is not None:
            n = fixed_n
            if triples and max(max(u, v) for u, v, _ in triples) >= n:
                raise FormatError(f"graph {gid} references a vertex >= declared n={n}")
        elif triples:
            n = 1 + max(max(u, v) for u, v, _ in triples)
        else:
            raise FormatError(f"graph {gid} has no edges and no '#n' header to size it")
        triples.sort(key=lambda t: (t[0], t[1]))
        graphs.append(from_edge_list(n, triples, graph_id=gid))
    class_labels = np.array([class_remap[raw_classes[gid]] for gid in graph_order],
                            dtype=np.int64)
    return Dataset(name=path.stem, graphs=tuple(graphs), class_labels=class_labels)


def save_weighted_graphs(ds: Dataset, path: str | Path) -> None:
    """Write ds in the weighted edge-record format plus its class sidecar."""
    path = Path(path)
    lines = []
    shared_n = {g.n for g in ds.graphs}
    if len(shared_n) == 1 and ds.graphs:
        lines.append(f"#n {shared_n.pop()}")
    for g in ds.graphs:
        for (u, v), w in zip(g.edges.tolist(), g.weights.tolist()):
            lines.append(f"{g.graph_id} {u} {v} {w!r}")
    path.write_text("\n".join(lines) + ("\n" if lines else ""))
    cls_lines = [f"{g.graph_id} {c}" for g, c in zip(ds.graphs, ds.class_labels.tolist())]
    classes_sidecar(path).write_text("\n".join(cls_lines) + ("\n" if cls_lines else ""))


# ---------------------------------------------------------------------------
# Toy topologies
# ---------------------------------------------------------------------------

def generate_topology(kind: str, n: int, p: float = 0.0, seed: int = 0) -> Graph:
    """Deterministic toy graph of the requested kind.

    communities3 builds three equal cliques of n/3 vertices joined by one
    bridge edge between consecutive cliques; regular is the degree-4
    circulant on offsets {1, 2}; erdos_renyi resamples until connected.
    """
    if kind not in TOPOLOGY_KINDS:
        raise ArgumentError(f"unknown topology kind {kind!r}")
    if n < 3:
        raise ArgumentError("n must be at least 3")
    graph_id = f"{kind}-{n}"

    if kind == "clique":
        edges = [(u, v, 1.0) for u in range(n) for v in range(u + 1, n)]
    elif kind == "ring":
        edges = [(i, i + 1, 1.0) for i in range(n - 1)] + [(0, n - 1, 1.0)]
    elif kind == "star":
        edges = [(0, i, 1.0) for i in range(1, n)]
    elif kind == "regular":
        pairs = {(min(i, (i + k) % n), max(i, (i + k) % n)) for i in range(n) for k in (1, 2)}
        edges = [(u, v, 1.0) for u, v in sorted(pairs)]
    elif kind == "communities3":
        if n % 3 != 0:
            raise ArgumentError("communities3 requires n divisible by 3")
        b = n // 3
        edges = [(u, v, 1.0)
                 for c in range(3)
                 for u in range(c * b, (c + 1) * b)
                 for v in range(u + 1, (c + 1) * b)]
        edges += [(b - 1, b, 1.0), (2 * b - 1, 2 * b, 1.0)]
    else:  # erdos_renyi
        if not 0 < p < 1:
            raise ArgumentError("erdos_renyi requires 0 < p < 1")
        rng = np.random.default_rng(seed)
        iu, iv = np.triu_indices(n, k=1)
        for _ in range(ER_MAX_RETRIES):
            mask = rng.random(len(iu)) < p
            g = Graph(n=n, edges=np.column_stack([iu[mask], iv[mask]]),
                      weights=np.ones(int(mask.sum())), graph_id=graph_id)
            if diagnose(g).connected:
                return g
        raise GenerationError(
            f"no connected G({n},{p}) sample within {ER_MAX_RETRIES} retries")

    return from_edge_list(n, edges, graph_id=graph_id)


# ---------------------------------------------------------------------------
# Summary statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DatasetStats:
    name: str
    num_graphs: int
    num_classes: int
    num_node_labels: int
    avg_nodes: float
    avg_edges: float

    def as_csv_row(self) -> str:
        labels = str(self.num_node_labels) if self.num_node_labels else "NA"
        return (f"{self.name},{self.num_graphs},{self.num_classes},{labels},"
                f"{self.avg_nodes:.2f},{self.avg_edges:.2f}")


def dataset_stats(ds: Dataset) -> DatasetStats:
    """Benchmark summary: counts, label cardinality, mean sizes."""
    num = max(ds.num_graphs, 1)
    return DatasetStats(
        name=ds.name,
        num_graphs=ds.num_graphs,
        num_classes=ds.num_classes,
        num_node_labels=len(ds.label_universe),
        avg_nodes=sum(g.n for g in ds.graphs) / num,
        avg_edges=sum(g.num_edges for g in ds.graphs) / num,
    )
