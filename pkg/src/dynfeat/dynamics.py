"""Random-walk operator and multiscale assortativity computations.

The walk operator M = D^-1 W is the row-stochastic one-step transition of
the uniform random walk on a weighted graph. All features are quadratic
forms of the lag-t autocovariance of the walker's position indicator,

    rho(t) = Pi M^t - pi^T pi,

evaluated by iterated sparse application of M -- rho(t) itself is never
materialized in the production path. A dense construction of rho(t) is
provided as a test oracle only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ArgumentError, CapacityError
from .graphs import Graph

DEFAULT_TIME_GRID = (0, 1, 2, 3)

# per-vertex propagation for the identity partition is refused above this size
IDENTITY_CAPACITY = 4096

# block width for batched column propagation (memory guard)
_BLOCK = 256


def time_grid(ts: Sequence[int] = DEFAULT_TIME_GRID) -> tuple[int, ...]:
    """Validate and sort a grid of non-negative integer times."""
    out = tuple(int(t) for t in ts)
    if len(out) == 0:
        raise ArgumentError("time grid must be non-empty")
    if any(t < 0 for t in out):
        raise ArgumentError("times must be non-negative")
    if len(set(out)) != len(out):
        raise ArgumentError("times must be distinct")
    return tuple(sorted(out))


@dataclass(frozen=True)
class WalkOperator:
    """One-step random-walk operator of a graph, with repaired isolation.

    Isolated vertices receive a synthetic unit self-loop so every row of M
    is stochastic and pi is strictly positive. Immutable; safe for
    concurrent use.
    """

    n: int
    strength: np.ndarray          # d, after repair
    total_weight: float           # 2m = sum of d
    pi: np.ndarray                # stationary vector d / 2m
    self_loop_repaired: bool
    _w: sp.csr_matrix             # symmetric weighted adjacency incl. repair loops

    def apply_right(self, x: np.ndarray) -> np.ndarray:
        """One step of a row distribution: x -> x M."""
        return self._w.dot(np.asarray(x, dtype=np.float64) / self.strength)

    def propagate_columns(self, y: np.ndarray) -> np.ndarray:
        """Right application M y (columns evolve as conditional expectations)."""
        if y.ndim == 1:
            return self._w.dot(y) / self.strength
        return self._w.dot(y) / self.strength[:, None]


def build_walk_operator(g: Graph, use_weights: bool = True) -> WalkOperator:
    """Construct the walk operator, repairing isolated vertices."""
    if g.n == 0:
        raise ArgumentError("cannot build a walk operator on an empty graph")
    u, v = g.edges[:, 0], g.edges[:, 1]
    wgt = g.weights if use_weights else np.ones(g.num_edges)
    strength = np.zeros(g.n)
    np.add.at(strength, u, wgt)
    np.add.at(strength, v, wgt)
    isolated = np.flatnonzero(strength == 0)
    strength[isolated] = 1.0
    rows = np.concatenate([u, v, isolated])
    cols = np.concatenate([v, u, isolated])
    vals = np.concatenate([wgt, wgt, np.ones(len(isolated))])
    total = float(strength.sum())
    return WalkOperator(
        n=g.n,
        strength=strength,
        total_weight=total,
        pi=strength / total,
        self_loop_repaired=bool(len(isolated)),
        _w=sp.csr_matrix((vals, (rows, cols)), shape=(g.n, g.n)),
    )


def numeric_assortativity(
    walk: WalkOperator, v: np.ndarray, ts: Sequence[int] = DEFAULT_TIME_GRID
) -> dict[int, float]:
    """Lag-t covariance of a numeric vertex attribute seen by the walker.

    For each t in the grid returns (pi*v) . (M^t v) - (pi.v)^2, sharing the
    propagation state across the ascending grid so the total cost is
    O(max(ts) * edges).
    """
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if len(v) != walk.n:
        raise ArgumentError(f"attribute length {len(v)} != vertex count {walk.n}")
    if not np.all(np.isfinite(v)):
        raise ArgumentError("attribute vector must be finite")
    grid = time_grid(ts)
    weighted = walk.pi * v
    mean_sq = float(np.dot(walk.pi, v)) ** 2
    out: dict[int, float] = {}
    y = v.copy()
    t_cur = 0
    for t in grid:
        while t_cur < t:
            y = walk.propagate_columns(y)
            t_cur += 1
        out[t] = float(np.dot(weighted, y)) - mean_sq
    return out


def categorical_assortativity(
    walk: WalkOperator, h: np.ndarray, ts: Sequence[int] = DEFAULT_TIME_GRID
) -> dict[int, float]:
    """Summed per-category covariance of an indicator (or any) column set.

    Equals the trace quadratic form of the lag-t autocovariance: the sum over
    columns of numeric_assortativity, with shared propagation. At t=1 this is
    the modularity of the partition encoded by h (Markov stability).
    """
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 2 or h.shape[0] != walk.n:
        raise ArgumentError(f"indicator must have {walk.n} rows")
    k = h.shape[1]
    if k > IDENTITY_CAPACITY:
        raise CapacityError(
            f"{k} categories exceeds the per-vertex propagation cap "
            f"({IDENTITY_CAPACITY}); identity-partition features are refused "
            "on graphs this large")
    grid = time_grid(ts)
    out = {t: 0.0 for t in grid}
    for start in range(0, k, _BLOCK):
        block = h[:, start:start + _BLOCK]
        weighted = walk.pi[:, None] * block
        mean_sq = float(np.sum(np.dot(walk.pi, block) ** 2))
        y = block.copy()
        t_cur = 0
        for t in grid:
            while t_cur < t:
                y = walk.propagate_columns(y)
                t_cur += 1
            out[t] += float(np.sum(weighted * y)) - mean_sq
    return out


def vertex_autocovariance_profile(
    walk: WalkOperator, ts: Sequence[int] = DEFAULT_TIME_GRID
) -> dict[int, np.ndarray]:
    """Per-vertex lag-t covariance of each one-hot vertex indicator.

    Entry k of the returned vector at time t is pi_k (M^t)_kk - pi_k^2, the
    covariance of the walker's presence at vertex k. Summing the vector gives
    the identity-partition assortativity at t.
    """
    if walk.n > IDENTITY_CAPACITY:
        raise CapacityError(
            f"{walk.n} vertices exceeds the per-vertex propagation cap "
            f"({IDENTITY_CAPACITY})")
    grid = time_grid(ts)
    out = {t: np.empty(walk.n) for t in grid}
    for start in range(0, walk.n, _BLOCK):
        stop = min(start + _BLOCK, walk.n)
        y = np.zeros((walk.n, stop - start))
        y[start + np.arange(stop - start), np.arange(stop - start)] = 1.0
        t_cur = 0
        for t in grid:
            while t_cur < t:
                y = walk.propagate_columns(y)
                t_cur += 1
            diag = y[start + np.arange(stop - start), np.arange(stop - start)]
            out[t][start:stop] = walk.pi[start:stop] * diag - walk.pi[start:stop] ** 2
    return out


def dense_autocovariance_oracle(walk: WalkOperator, t: int) -> np.ndarray:
    """Explicit lag-t autocovariance matrix Pi M^t - pi^T pi (test oracle).

    Guarded to small graphs; intended for validating the streamed quadratic
    forms, never for production feature extraction.
    """
    if walk.n > 200:
        raise ArgumentError("dense oracle is limited to n <= 200")
    if t < 0:
        raise ArgumentError("t must be non-negative")
    m = walk._w.toarray() / walk.strength[:, None]
    mt = np.linalg.matrix_power(m, t)
    return np.diag(walk.pi) @ mt - np.outer(walk.pi, walk.pi)
