"""Synthetic dataset generators for end-to-end pipeline checks.

The fixed-vertex generator mimics a cohort of same-sized weighted networks:
one class carries a planted 3-block community structure, the other is
density-matched Erdos-Renyi noise. The planted-signal generator produces
variable-size graphs whose classes differ only in community structure.
"""

from __future__ import annotations

import numpy as np

from .errors import ArgumentError
from .graphs import Dataset, Graph

FIXED_VERTEX_N = 84
FIXED_VERTEX_CLASS_SIZES = (91, 113)
P_WITHIN = 0.3
P_BETWEEN = 0.05
WEIGHT_RANGE = (1, 10)


def _sample_block_graph(
    n: int,
    block_of: np.ndarray,
    p_within: float,
    p_between: float,
    rng: np.random.Generator,
    weight_range: tuple[int, int],
    graph_id: str,
) -> Graph:
    iu, iv = np.triu_indices(n, k=1)
    p = np.where(block_of[iu] == block_of[iv], p_within, p_between)
    mask = rng.random(len(iu)) < p
    m = int(mask.sum())
    weights = rng.integers(weight_range[0], weight_range[1] + 1, size=m).astype(np.float64)
    return Graph(n=n, edges=np.column_stack([iu[mask], iv[mask]]),
                 weights=weights, graph_id=graph_id)


def expected_planted_density(n: int, blocks: int, p_within: float, p_between: float) -> float:
    """Edge probability of an Erdos-Renyi graph matching the planted model."""
    sizes = np.full(blocks, n // blocks)
    sizes[: n % blocks] += 1
    within_pairs = float(np.sum(sizes * (sizes - 1) / 2))
    total_pairs = n * (n - 1) / 2
    between_pairs = total_pairs - within_pairs
    return (within_pairs * p_within + between_pairs * p_between) / total_pairs


def generate_fixed_vertex_dataset(
    seed: int,
    n: int = FIXED_VERTEX_N,
    class_sizes: tuple[int, int] = FIXED_VERTEX_CLASS_SIZES,
    blocks: int = 3,
    p_within: float = P_WITHIN,
    p_between: float = P_BETWEEN,
    weight_range: tuple[int, int] = WEIGHT_RANGE,
) -> Dataset:
    """Two-class cohort of weighted graphs on one shared vertex set.

    Class 0 graphs carry a planted partition into equal blocks (dense within,
    sparse between); class 1 graphs are Erdos-Renyi with the same expected
    edge count. Edge weights are uniform integers in weight_range for both
    classes. Deterministic given the seed.
    """
    if n < blocks:
        raise ArgumentError("need at least one vertex per block")
    rng = np.random.default_rng(seed)
    block_of = np.arange(n) % blocks
    block_of.sort()
    p_er = expected_planted_density(n, blocks, p_within, p_between)
    graphs = []
    labels = []
    for i in range(class_sizes[0]):
        graphs.append(_sample_block_graph(
            n, block_of, p_within, p_between, rng, weight_range, f"planted{i:03d}"))
        labels.append(0)
    uniform = np.zeros(n, dtype=np.int64)
    for i in range(class_sizes[1]):
        graphs.append(_sample_block_graph(
            n, uniform, p_er, p_er, rng, weight_range, f"noise{i:03d}"))
        labels.append(1)
    return Dataset(name=f"fixed_vertex_{seed}", graphs=tuple(graphs),
                   class_labels=np.asarray(labels, dtype=np.int64))


def generate_planted_signal_dataset(
    seed: int,
    graphs_per_class: int = 60,
    n_range: tuple[int, int] = (20, 40),
    p_within: float = 0.5,
    p_between: float = 0.1,
) -> Dataset:
    """Variable-size two-class dataset separable by community structure.

    Class 0 graphs are Erdos-Renyi; class 1 graphs plant two equal blocks at
    matched expected density, so community-sensitive features carry the class
    signal while plain size statistics do not.
    """
    rng = np.random.default_rng(seed)
    graphs = []
    labels = []
    for i in range(graphs_per_class):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        p_er = expected_planted_density(n, 2, p_within, p_between)
        graphs.append(_sample_block_graph(
            n, np.zeros(n, dtype=np.int64), p_er, p_er, rng, (1, 1), f"er{i:03d}"))
        labels.append(0)
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        block_of = np.sort(np.arange(n) % 2)
        graphs.append(_sample_block_graph(
            n, block_of, p_within, p_between, rng, (1, 1), f"blk{i:03d}"))
        labels.append(1)
    return Dataset(name=f"planted_signal_{seed}", graphs=tuple(graphs),
                   class_labels=np.asarray(labels, dtype=np.int64))
