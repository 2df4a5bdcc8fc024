"""(1±ε) cut sparsification by importance sampling, offline and over a stream.

Each edge is kept with probability p_e = min(1, ρ/λ̂_e) and reweighted by
1/p_e, where λ̂_e is the index of the sparse spanning forest the edge lands in
and ρ = C·log²n/ε². The streaming variant buffers edges and sparsifies full
buffers level by level (merge-and-reduce), so memory stays near the budget.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import minimum_spanning_tree

from hcstream.errors import InvalidArgumentError
from hcstream.graph import WORDS_PER_EDGE, WeightedGraph, crossing_table
from hcstream.stream import EdgeStream, Meter

logger = logging.getLogger(__name__)

DEFAULT_BUDGET_C = 6.0
DEFAULT_EPSILON = 0.2


def _log2(n: int) -> float:
    return math.log2(max(n, 2))


def oversampling(n: int, epsilon: float, budget_c: float = DEFAULT_BUDGET_C) -> float:
    """ρ = C·log²n/ε²."""
    return budget_c * _log2(n) ** 2 / epsilon**2


def target_edges(n: int, epsilon: float, budget_c: float = DEFAULT_BUDGET_C) -> int:
    """Edge budget C·n·log³n/ε²; graphs at or below it are not sampled."""
    return max(1, math.ceil(budget_c * n * _log2(n) ** 3 / epsilon**2))


def budget_words(n: int, epsilon: float, budget_c: float = DEFAULT_BUDGET_C) -> int:
    return WORDS_PER_EDGE * target_edges(n, epsilon, budget_c)


def _check_epsilon(epsilon: float) -> None:
    if not 0 < epsilon < 1:
        raise InvalidArgumentError(f"epsilon must lie in (0, 1), got {epsilon}")


def forest_index(g: WeightedGraph) -> np.ndarray:
    """1-based index of the spanning forest each edge first appears in.

    Forests are peeled off one at a time as maximum-weight spanning forests
    of the edges not yet assigned.
    """
    index = np.zeros(g.m, dtype=np.int64)
    keys = g.u * g.n + g.v
    remaining = np.arange(g.m)
    level = 0
    while len(remaining):
        level += 1
        rest = sp.csr_matrix(
            (1.0 / g.w[remaining], (g.u[remaining], g.v[remaining])), shape=(g.n, g.n)
        )
        forest = minimum_spanning_tree(rest).tocoo()
        lo = np.minimum(forest.row, forest.col).astype(np.int64)
        hi = np.maximum(forest.row, forest.col).astype(np.int64)
        index[np.searchsorted(keys, lo * g.n + hi)] = level
        remaining = remaining[index[remaining] == 0]
    return index


def offline_sparsify(
    g: WeightedGraph,
    epsilon: float,
    seed: int,
    budget_c: float = DEFAULT_BUDGET_C,
    target: int | None = None,
) -> WeightedGraph:
    """Sample a reweighted subgraph preserving every cut within (1±ε).

    Graphs with at most ``target`` edges (default: the C·n·log³n/ε² budget)
    are returned unchanged.
    """
    _check_epsilon(epsilon)
    if g.n == 0:
        raise InvalidArgumentError("Cannot sparsify an empty graph")
    limit = target_edges(g.n, epsilon, budget_c) if target is None else target
    if g.m <= limit:
        return g

    rho = oversampling(g.n, epsilon, budget_c)
    probability = np.minimum(1.0, rho / forest_index(g))
    rng = np.random.default_rng(seed)
    keep = rng.random(g.m) < probability
    h = WeightedGraph.from_arrays(g.n, g.u[keep], g.v[keep], g.w[keep] / probability[keep])
    logger.debug("Sparsified %d -> %d edges (rho=%.3g)", g.m, h.m, rho)
    return h


# =============================================================================
# Streaming merge-and-reduce
# =============================================================================


@dataclass
class SparsifierState:
    """Bookkeeping of one streaming sparsification run."""

    epsilon: float
    seed: int
    n: int
    target_size: int
    level_epsilon: float
    budget_c: float = DEFAULT_BUDGET_C
    level_buffers: list[WeightedGraph | None] = field(default_factory=list)
    meter: Meter = field(default_factory=Meter)
    edges_in: int = 0
    reductions: int = 0

    @property
    def words_peak(self) -> int:
        return self.meter.words_peak

    @property
    def words_now(self) -> int:
        return self.meter.words_now

    @property
    def failure_bound(self) -> float:
        """Union bound over reductions, each failing with probability at most n^-C."""
        if self.reductions == 0:
            return 0.0
        return min(1.0, self.reductions * self.n ** -self.budget_c)

    def to_dict(self) -> dict[str, object]:
        return {
            "epsilon": self.epsilon,
            "level_epsilon": self.level_epsilon,
            "target_size": self.target_size,
            "levels": len(self.level_buffers),
            "reductions": self.reductions,
            "edges_in": self.edges_in,
            "words_peak": self.words_peak,
            "failure_bound": self.failure_bound,
        }


def _reduction_seed(seed: int, level: int, count: int) -> int:
    return int(np.random.SeedSequence([seed, level, count]).generate_state(1)[0])


class _MergeReduce:
    def __init__(self, n: int, state: SparsifierState, budget_c: float):
        self.n = n
        self.state = state
        self.budget_c = budget_c

    def reduce(self, g: WeightedGraph, level: int) -> WeightedGraph:
        state = self.state
        seed = _reduction_seed(state.seed, level, state.reductions)
        h = offline_sparsify(g, state.level_epsilon, seed, self.budget_c, target=state.target_size)
        state.reductions += 1
        state.meter.store(WORDS_PER_EDGE * h.m)
        state.meter.release(WORDS_PER_EDGE * g.m)
        return h

    def push(self, g: WeightedGraph, level: int) -> None:
        """Store g at level; an occupied level merges, reduces and carries upward."""
        buffers = self.state.level_buffers
        while True:
            while len(buffers) <= level:
                buffers.append(None)
            held = buffers[level]
            if held is None:
                buffers[level] = g
                return
            buffers[level] = None
            merged = union(self.n, [held, g])
            self.state.meter.release(WORDS_PER_EDGE * (held.m + g.m - merged.m))
            g = self.reduce(merged, level)
            level += 1


def union(n: int, graphs: list[WeightedGraph]) -> WeightedGraph:
    """Edge-disjoint union with parallel edges merged."""
    parts = [g for g in graphs if g.m]
    if not parts:
        return WeightedGraph.from_edges(n, [])
    return WeightedGraph.from_arrays(
        n,
        np.concatenate([g.u for g in parts]),
        np.concatenate([g.v for g in parts]),
        np.concatenate([g.w for g in parts]),
    )


def stream_sparsify(
    stream: EdgeStream,
    n: int,
    epsilon: float,
    seed: int,
    budget_c: float = DEFAULT_BUDGET_C,
    target: int | None = None,
    meter: Meter | None = None,
) -> tuple[WeightedGraph, SparsifierState]:
    """Single pass over the stream producing a (1±ε) cut sparsifier."""
    _check_epsilon(epsilon)
    if stream.n != n:
        raise InvalidArgumentError(f"Stream has {stream.n} vertices, expected {n}")
    size = target_edges(n, epsilon, budget_c) if target is None else max(1, target)
    declared = max(stream.declared_edges, 1)
    levels = max(1, math.ceil(math.log2(declared / size))) if declared > size else 1
    state = SparsifierState(
        epsilon=epsilon,
        seed=seed,
        target_size=size,
        level_epsilon=epsilon / (2 * levels),
        budget_c=budget_c,
        n=n,
        meter=meter or Meter(),
    )
    worker = _MergeReduce(n, state, budget_c)

    us: list[int] = []
    vs: list[int] = []
    ws: list[float] = []
    for a, b, weight in stream:
        us.append(a)
        vs.append(b)
        ws.append(weight)
        state.edges_in += 1
        state.meter.store(WORDS_PER_EDGE)
        if len(us) >= 2 * size:
            raw = WeightedGraph.from_arrays(n, np.array(us), np.array(vs), np.array(ws))
            state.meter.release(WORDS_PER_EDGE * (len(us) - raw.m))
            us, vs, ws = [], [], []
            worker.push(worker.reduce(raw, 0), 1)
    state.meter.passes = stream.passes_used

    tail = WeightedGraph.from_arrays(n, np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64), np.array(ws))
    pieces = [tail, *(b for b in state.level_buffers if b is not None)]
    result = union(n, pieces)
    state.meter.release(WORDS_PER_EDGE * (sum(p.m for p in pieces) - result.m))
    if result.m > size:
        result = worker.reduce(result, len(state.level_buffers))
    logger.info(
        "Streamed %d edges into a %d-edge sparsifier (peak %d words, %d reductions)",
        state.edges_in,
        result.m,
        state.words_peak,
        state.reductions,
    )
    return result, state


# =============================================================================
# Fidelity checks
# =============================================================================


def measure_cut_error(g: WeightedGraph, h: WeightedGraph) -> float:
    """Largest relative error |w_H(S, S̄)/w_G(S, S̄) - 1| over every global cut (n <= 20)."""
    if g.n != h.n:
        raise InvalidArgumentError("Graphs must share a vertex set")
    if g.n < 2:
        return 0.0
    original = crossing_table(g.dense())
    sparse = crossing_table(h.dense())
    # masks without the top vertex list every bipartition once
    half = 1 << (g.n - 1)
    original, sparse = original[1:half], sparse[1:half]
    if np.any((original == 0) & (sparse > 0)):
        return math.inf
    nonzero = original > 0
    if not nonzero.any():
        return 0.0
    return float(np.max(np.abs(sparse[nonzero] / original[nonzero] - 1.0)))


def sampled_cut_error(
    g: WeightedGraph, h: WeightedGraph, samples: int = 10_000, seed: int = 0, chunk: int = 256
) -> float:
    """Largest relative cut error over random cuts plus every singleton cut."""
    if g.n != h.n:
        raise InvalidArgumentError("Graphs must share a vertex set")
    worst = 0.0
    deg_g, deg_h = g.degrees, h.degrees
    for a, b in zip(deg_g, deg_h):
        if a == 0:
            if b > 0:
                return math.inf
            continue
        worst = max(worst, abs(b / a - 1.0))
    rng = np.random.default_rng(seed)
    done = 0
    while done < samples:
        batch = min(chunk, samples - done)
        sides = rng.random((batch, g.n)) < 0.5
        cut_g = (sides[:, g.u] != sides[:, g.v]) @ g.w
        cut_h = (sides[:, h.u] != sides[:, h.v]) @ h.w
        if np.any((cut_g == 0) & (cut_h > 0)):
            return math.inf
        nonzero = cut_g > 0
        if nonzero.any():
            worst = max(worst, float(np.max(np.abs(cut_h[nonzero] / cut_g[nonzero] - 1.0))))
        done += batch
    return worst
