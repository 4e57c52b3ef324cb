"""Candidate node attributes fed into the assortativity features.

Numeric attributes are length-n vectors (strength, subdominant eigenvector,
clustering, betweenness, triangle counts); categorical attributes are n x k
one-hot indicator matrices. Structural attributes other than strength ignore
edge weights: fiber-count style weights are similarities, not distances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ArgumentError, ConvergenceError
from .graphs import Graph
from .dynamics import build_walk_operator

# residual guarantee of the subdominant eigenvector on return
EIGEN_RESIDUAL_BOUND = 1e-8

# eigenvalue-magnitude gap below which the second eigenspace is flagged degenerate
_DEGENERACY_GAP = 1e-6


@dataclass(frozen=True)
class AttributeValue:
    """A named node attribute: numeric vector or indicator matrix."""

    name: str
    kind: str                      # "numeric" | "indicator"
    v: np.ndarray | None = None
    h: np.ndarray | None = None
    degenerate: bool = False

    def __post_init__(self):
        if self.kind == "numeric":
            if self.v is None or self.v.ndim != 1:
                raise ArgumentError("numeric attribute requires a vector")
            if not np.all(np.isfinite(self.v)):
                raise ArgumentError("numeric attribute must be finite")
        elif self.kind == "indicator":
            if self.h is None or self.h.ndim != 2 or self.h.shape[1] < 1:
                raise ArgumentError("indicator attribute requires an n x k matrix")
            if not np.array_equal(self.h.sum(axis=1), np.ones(self.h.shape[0])):
                raise ArgumentError("each indicator row must sum to exactly 1")
        else:
            raise ArgumentError(f"unknown attribute kind {self.kind!r}")


def degree_attribute(g: Graph) -> AttributeValue:
    """Vertex strength (sum of incident weights), with isolation repair.

    Isolated vertices count their synthetic self-loop, matching the walk
    operator whose stationary vector is proportional to this attribute.
    """
    s = g.strength()
    s[s == 0] = 1.0
    return AttributeValue(name="degree", kind="numeric", v=s)


def second_left_eigenvector(
    g: Graph, tol: float = 1e-10, max_iter: int = 10000
) -> tuple[AttributeValue, float]:
    """Unit left eigenvector of M for the second-largest-magnitude eigenvalue.

    Power iteration runs on the symmetric similarity S = D^-1/2 W D^-1/2 with
    deflation against its known leading eigenvector (proportional to sqrt of
    the strengths); the result maps back through w = D^1/2 y and is
    renormalized. "Second dominant" orders eigenvalues by magnitude, so
    bipartite graphs return the eigenvalue -1.

    Returns (attribute, eigenvalue); the attribute's sign is fixed so its
    largest-magnitude entry is positive, and it is flagged degenerate when
    the next eigenvalue ties the returned one in magnitude.

    Raises ConvergenceError (carrying the last residual) when the walk
    residual fails to reach EIGEN_RESIDUAL_BOUND within max_iter steps.
    """
    if g.n < 2:
        raise ArgumentError("second eigenvector needs at least 2 vertices")
    walk = build_walk_operator(g)
    sqrt_d = np.sqrt(walk.strength)
    leading = sqrt_d / np.linalg.norm(sqrt_d)

    def apply_s(x: np.ndarray) -> np.ndarray:
        return walk._w.dot(x / sqrt_d) / sqrt_d

    # the D^1/2 map can amplify the similarity-space residual, so tighten the
    # tolerance until the walk-space residual meets the contract bound
    eff_tol = tol
    for _ in range(3):
        y, lam, residual, converged = _deflated_power_iteration(
            apply_s, [leading], g.n, eff_tol, max_iter)
        w = sqrt_d * y
        w /= np.linalg.norm(w)
        walk_residual = float(np.linalg.norm(walk.apply_right(w) - lam * w))
        if converged and walk_residual <= EIGEN_RESIDUAL_BOUND:
            break
        if not converged:
            raise ConvergenceError(
                f"second eigenvector stalled at residual {walk_residual:.3e}",
                residual=walk_residual)
        eff_tol /= 100.0
    else:
        raise ConvergenceError(
            f"second eigenvector stalled at residual {walk_residual:.3e}",
            residual=walk_residual)

    top = np.argmax(np.abs(w))
    if w[top] < 0:
        w = -w

    # probe the next eigenvalue to detect a degenerate second eigenspace
    _, lam3, _, _ = _deflated_power_iteration(
        apply_s, [leading, y], g.n, 1e-9, min(max_iter, 2000), seed=1)
    degenerate = abs(abs(lam) - abs(lam3)) <= _DEGENERACY_GAP * max(1.0, abs(lam))

    attr = AttributeValue(name="second_eigenvector", kind="numeric", v=w,
                          degenerate=bool(degenerate))
    return attr, float(lam)


def _deflated_power_iteration(apply_s, deflate, n, tol, max_iter, seed=0):
    """Power iteration on a symmetric operator, orthogonal to `deflate`.

    Returns (vector, rayleigh eigenvalue, residual, converged). The start
    vector is redrawn if it collapses under deflation; an exhausted
    complement reports eigenvalue 0 immediately.
    """
    if len(deflate) >= n:
        return np.zeros(n), 0.0, 0.0, True
    rng = np.random.default_rng(seed)
    x = np.zeros(n)
    norm = 0.0
    for _ in range(10):
        x = rng.standard_normal(n)
        for q in deflate:
            x -= np.dot(q, x) * q
        norm = np.linalg.norm(x)
        if norm > 1e-8:
            break
    if norm <= 1e-8:
        return x, 0.0, 0.0, True
    x /= norm
    lam = 0.0
    residual = np.inf
    best_residual = np.inf
    checkpoint = np.inf
    for it in range(max_iter):
        z = apply_s(x)
        for q in deflate:
            z -= np.dot(q, z) * q
        lam = float(np.dot(x, z))
        residual = float(np.linalg.norm(z - lam * x))
        if residual <= tol:
            return x, lam, residual, True
        best_residual = min(best_residual, residual)
        if it % 200 == 199:
            # equal-magnitude eigenvalue pairs (e.g. disconnected bipartite
            # graphs) oscillate with a constant residual: bail out early
            if best_residual >= checkpoint * (1.0 - 1e-6):
                return x, lam, residual, False
            checkpoint = best_residual
        norm = np.linalg.norm(z)
        if norm <= 1e-300:  # x is (numerically) in the kernel: eigenvalue 0
            return x, 0.0, 0.0, True
        x = z / norm
    return x, lam, residual, False


def _binary_adjacency_sets(g: Graph):
    adj = g.adjacency(weighted=False)
    return adj.indptr, adj.indices


def triangles_per_node(g: Graph) -> AttributeValue:
    """Number of distinct triangles through each vertex (weights ignored)."""
    a = g.adjacency(weighted=False)
    counts = np.asarray((a @ a).multiply(a).sum(axis=1)).reshape(-1) / 2.0
    return AttributeValue(name="triangles", kind="numeric", v=counts)


def local_clustering(g: Graph) -> AttributeValue:
    """Fraction of each vertex's neighbor pairs that are connected.

    Zero for vertices of degree <= 1; weights ignored.
    """
    a = g.adjacency(weighted=False)
    tri = np.asarray((a @ a).multiply(a).sum(axis=1)).reshape(-1) / 2.0
    deg = np.diff(a.indptr)
    out = np.zeros(g.n)
    mask = deg >= 2
    out[mask] = 2.0 * tri[mask] / (deg[mask] * (deg[mask] - 1.0))
    return AttributeValue(name="clustering", kind="numeric", v=out)


@njit(cache=True)
def _brandes_kernel(indptr, indices, n):
    """Brandes dependency accumulation over unweighted shortest paths.

    Predecessors are recovered during the reverse sweep as neighbors one BFS
    level closer, avoiding per-vertex predecessor lists (hot path)."""
    score = np.zeros(n)
    dist = np.empty(n, dtype=np.int64)
    sigma = np.empty(n)
    delta = np.empty(n)
    order = np.empty(n, dtype=np.int64)  # BFS visit order; doubles as queue
    for s in range(n):
        dist[:] = -1
        sigma[:] = 0.0
        delta[:] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        order[0] = s
        head, tail = 0, 1
        while head < tail:
            u = order[head]
            head += 1
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    order[tail] = v
                    tail += 1
                if dist[v] == dist[u] + 1:
                    sigma[v] += sigma[u]
        for k in range(tail - 1, 0, -1):  # non-increasing distance from s
            w = order[k]
            coeff = (1.0 + delta[w]) / sigma[w]
            for j in range(indptr[w], indptr[w + 1]):
                u = indices[j]
                if dist[u] == dist[w] - 1:
                    delta[u] += sigma[u] * coeff
            score[w] += delta[w]
    return score


def betweenness(g: Graph) -> AttributeValue:
    """Shortest-path betweenness, unnormalized, unordered pairs counted once.

    Brandes' dependency accumulation over unweighted shortest paths on the
    binarized topology.
    """
    indptr, indices = _binary_adjacency_sets(g)
    score = _brandes_kernel(indptr, indices, g.n)
    return AttributeValue(name="betweenness", kind="numeric", v=score / 2.0)


def label_indicator(g: Graph, universe) -> AttributeValue:
    """One-hot matrix of the graph's node labels over a dataset-wide universe.

    Column order follows the sorted universe so columns align across graphs.
    """
    if g.node_labels is None:
        raise ArgumentError("graph has no node labels")
    columns = sorted(universe)
    index = {val: i for i, val in enumerate(columns)}
    missing = set(g.node_labels.tolist()) - set(columns)
    if missing:
        raise ArgumentError(f"node labels {sorted(missing)} outside the universe")
    h = np.zeros((g.n, len(columns)))
    h[np.arange(g.n), [index[val] for val in g.node_labels.tolist()]] = 1.0
    return AttributeValue(name="node_labels", kind="indicator", h=h)


def identity_indicator(n: int) -> AttributeValue:
    """Identity matrix: every vertex is its own category."""
    if n < 1:
        raise ArgumentError("identity indicator needs n >= 1")
    return AttributeValue(name="identity_partition", kind="indicator", h=np.eye(n))
