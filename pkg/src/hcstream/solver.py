"""Recursive β-balanced min-cut hierarchical clustering.

Every cluster of two or more vertices is split by a balanced cut of its own
induced subgraph. Cut finders:

- exact: exhaustive balanced minimum cut (small subgraphs only)
- spectral: Fiedler-vector sweep followed by Kernighan–Lin refinement
- random: best of several random balanced cuts after the same refinement
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any

import networkx as nx
import numpy as np
from networkx.algorithms.community import kernighan_lin_bisection

from hcstream.errors import HCError, InvalidArgumentError, SolverError
from hcstream.graph import WORDS_PER_EDGE, Cut, WeightedGraph, fiedler_vector, sweep_cuts
from hcstream.oracle import EXACT_CUT_CAP, exact_balanced_min_cut
from hcstream.tree import HCTree, balanced_side_limit, cost_lca

logger = logging.getLogger(__name__)

DEFAULT_BETA = 1 / 3


class FinderKind(str, Enum):
    EXACT = "exact"
    SPECTRAL = "spectral"
    RANDOM = "random"

    @classmethod
    def parse(cls, name: str) -> FinderKind:
        aliases = {"spectral_refine": "spectral", "random_restart": "random"}
        try:
            return cls(aliases.get(name, name))
        except ValueError as e:
            raise InvalidArgumentError(
                f"Unknown cut finder '{name}'. Use one of: exact, spectral, random"
            ) from e


@dataclass(frozen=True)
class CutFinder:
    """Balanced-cut rule applied at every node of the recursion."""

    kind: FinderKind = FinderKind.SPECTRAL
    seed: int = 0
    restarts: int = 8
    refine_passes: int = 4
    power_iterations: int = 300
    exact_below: int = 10
    exact_cap: int = EXACT_CUT_CAP

    @classmethod
    def named(cls, name: str, **params: Any) -> CutFinder:
        return cls(kind=FinderKind.parse(name), **params)

    def with_seed(self, seed: int) -> CutFinder:
        return replace(self, seed=seed)

    def runs_exact(self, size: int) -> bool:
        return self.kind is FinderKind.EXACT or size <= self.exact_below

    def find(self, g: WeightedGraph, beta: float, salt: int = 0) -> Cut:
        """A β-balanced cut of g in g's own vertex ids."""
        if g.n < 2:
            raise SolverError("Cannot split fewer than 2 vertices", size=g.n)
        if self.runs_exact(g.n):
            if g.n > self.exact_cap:
                raise SolverError(
                    f"Exact cut finder is limited to {self.exact_cap} vertices, got a subgraph of size {g.n}",
                    size=g.n,
                )
            return exact_balanced_min_cut(g, range(g.n), beta, cap=self.exact_cap)
        seed = int(np.random.SeedSequence([self.seed, salt]).generate_state(1)[0])
        if self.kind is FinderKind.SPECTRAL:
            return spectral_refine_cut(g, beta, self, seed)
        return random_restart_cut(g, beta, self, seed)


# =============================================================================
# Heuristic cut finders
# =============================================================================


def _side_weight(g: WeightedGraph, in_a: np.ndarray) -> float:
    return float(g.w[in_a[g.u] != in_a[g.v]].sum())


def _to_cut(g: WeightedGraph, in_a: np.ndarray) -> Cut:
    side_a = frozenset(np.flatnonzero(in_a).tolist())
    side_b = frozenset(np.flatnonzero(~in_a).tolist())
    return Cut(side_a, side_b, _side_weight(g, in_a))


def _pack_components(components: list[np.ndarray], n: int, limit: int) -> np.ndarray | None:
    """Zero-weight split grouping whole components, if one fits the balance limit."""
    if len(components) < 2:
        return None
    in_a = np.zeros(n, dtype=bool)
    size_a = size_b = 0
    for comp in sorted(components, key=lambda c: (-len(c), int(c[0]))):
        if size_a <= size_b:
            in_a[comp] = True
            size_a += len(comp)
        else:
            size_b += len(comp)
    if max(size_a, size_b) <= limit and size_a and size_b:
        return in_a
    return None


def as_networkx(g: WeightedGraph) -> nx.Graph:
    """Undirected networkx graph on 0..n-1 with ``weight`` edge attributes."""
    graph = nx.Graph()
    graph.add_nodes_from(range(g.n))
    graph.add_weighted_edges_from(zip(g.u.tolist(), g.v.tolist(), g.w.tolist()))
    return graph


def refine_swaps(g: WeightedGraph, in_a: np.ndarray, passes: int, seed: int = 0) -> np.ndarray:
    """Kernighan–Lin refinement of a bipartition; side sizes are preserved."""
    in_a = in_a.copy()
    if g.m == 0 or in_a.all() or not in_a.any():
        return in_a
    side_a = set(np.flatnonzero(in_a).tolist())
    side_b = set(np.flatnonzero(~in_a).tolist())
    refined, _ = kernighan_lin_bisection(
        as_networkx(g), partition=(side_a, side_b), max_iter=passes, weight="weight", seed=seed
    )
    in_a[:] = False
    in_a[list(refined)] = True
    return in_a


def _spectral_candidate(
    g: WeightedGraph, limit: int, params: CutFinder, seed: int
) -> tuple[np.ndarray, bool]:
    """Best balanced sweep over the Fiedler order of the largest component.

    The remaining components go to whichever side keeps the split balanced.
    """
    n = g.n
    components = sorted(g.components(), key=lambda c: (-len(c), int(c[0])))
    main = components[0]
    others = np.concatenate(components[1:]) if len(components) > 1 else np.empty(0, np.int64)
    m_size, o_size = len(main), len(others)

    sub, _ = g.induced(main)
    if sub.m:
        embedding, _, converged = fiedler_vector(sub, seed=seed, iterations=params.power_iterations)
    else:
        embedding, converged = np.zeros(m_size), False
    order = np.argsort(embedding, kind="stable")
    prefix_cuts = np.concatenate([[0.0], sweep_cuts(sub, order), [0.0]])

    best = None
    for others_with_prefix in (True, False):
        sizes = np.arange(m_size + 1)
        side_a = sizes + (o_size if others_with_prefix else 0)
        feasible = (side_a >= 1) & (side_a <= limit) & (n - side_a >= 1) & (n - side_a <= limit)
        if not feasible.any():
            continue
        options = np.flatnonzero(feasible)
        p = int(options[np.argmin(prefix_cuts[options])])
        if best is None or prefix_cuts[p] < best[0]:
            best = (prefix_cuts[p], p, others_with_prefix)

    if best is None:
        raise SolverError("No balanced sweep position exists", size=n)
    _, p, others_with_prefix = best
    in_a = np.zeros(n, dtype=bool)
    in_a[main[order[:p]]] = True
    if others_with_prefix:
        in_a[others] = True
    return in_a, converged


def spectral_refine_cut(g_sub: WeightedGraph, beta: float, params: CutFinder, seed: int = 0) -> Cut:
    """Fiedler sweep constrained to β-balance, then swap refinement."""
    n = g_sub.n
    if n < 2:
        raise SolverError("Cannot split fewer than 2 vertices", size=n)
    limit = balanced_side_limit(n, beta)
    packed = _pack_components(g_sub.components(), n, limit)
    if packed is not None:
        return _to_cut(g_sub, packed)

    in_a, converged = _spectral_candidate(g_sub, limit, params, seed)
    candidates = [in_a]
    if not converged:
        # id-order fallback
        fallback = np.zeros(n, dtype=bool)
        fallback[: n // 2] = True
        candidates.append(fallback)
    refined = [refine_swaps(g_sub, c, params.refine_passes, seed) for c in candidates]
    weights = [_side_weight(g_sub, c) for c in refined]
    return _to_cut(g_sub, refined[int(np.argmin(weights))])


def random_restart_cut(g_sub: WeightedGraph, beta: float, params: CutFinder, seed: int = 0) -> Cut:
    """Best of params.restarts random halvings after Kernighan–Lin refinement."""
    n = g_sub.n
    if n < 2:
        raise SolverError("Cannot split fewer than 2 vertices", size=n)
    limit = balanced_side_limit(n, beta)
    packed = _pack_components(g_sub.components(), n, limit)
    if packed is not None:
        return _to_cut(g_sub, packed)

    rng = np.random.default_rng(seed)
    best, best_weight = None, np.inf
    for _ in range(max(1, params.restarts)):
        in_a = np.zeros(n, dtype=bool)
        in_a[rng.permutation(n)[: n // 2]] = True
        in_a = refine_swaps(g_sub, in_a, params.refine_passes, int(rng.integers(2**31)))
        weight = _side_weight(g_sub, in_a)
        if weight < best_weight:
            best, best_weight = in_a, weight
    assert best is not None
    return _to_cut(g_sub, best)


# =============================================================================
# Recursive driver
# =============================================================================


def _check_beta(beta: float) -> None:
    if not 0 < beta <= 0.5:
        raise InvalidArgumentError(f"beta must lie in (0, 1/2], got {beta}")


def grow_balanced_tree(g: WeightedGraph, beta: float, finder: CutFinder) -> tuple[HCTree, int]:
    """Recursive balanced clustering plus the number of cut-finder calls made."""
    _check_beta(beta)
    if g.n == 0:
        raise InvalidArgumentError("Cannot cluster an empty graph")
    holder: list[Any] = [None]
    stack: list[tuple[WeightedGraph, np.ndarray, list[Any], int]] = [
        (g, np.arange(g.n), holder, 0)
    ]
    cut_calls = 0
    while stack:
        sub, ids, parent, slot = stack.pop()
        if sub.n == 1:
            parent[slot] = int(ids[0])
            continue
        try:
            cut = finder.find(sub, beta, salt=int(ids[0]) * 1_000_003 + sub.n)
        except SolverError:
            raise
        except HCError as e:
            raise SolverError(
                f"Cut finder failed on a subgraph of size {sub.n}: {e.message}", size=sub.n
            ) from e
        cut_calls += 1
        node: list[Any] = [None, None]
        parent[slot] = node
        for position, side in ((1, cut.side_b), (0, cut.side_a)):
            part, local = sub.induced(np.fromiter(side, dtype=np.int64))
            stack.append((part, ids[local], node, position))
    return HCTree.from_nested(holder[0]), cut_calls


def recursive_balanced_hc(
    g: WeightedGraph, beta: float = DEFAULT_BETA, finder: CutFinder | None = None
) -> HCTree:
    """Split every cluster by the finder's β-balanced cut of its induced subgraph."""
    tree, _ = grow_balanced_tree(g, beta, finder or CutFinder())
    return tree


def lower_bound_balanced(g: WeightedGraph, finder: CutFinder | None = None) -> float:
    """(n/3) times the weight of a minimum 1/3-balanced cut; 0 when n < 3."""
    if g.n < 3:
        return 0.0
    finder = finder or CutFinder(kind=FinderKind.EXACT)
    try:
        cut = finder.find(g, 1 / 3, salt=g.n)
    except SolverError:
        raise
    except HCError as e:
        raise SolverError(f"Cut finder failed on a graph of size {g.n}: {e.message}", size=g.n) from e
    return g.n / 3 * cut.weight


# =============================================================================
# Reports
# =============================================================================


@dataclass
class RunMetrics:
    words_peak: int = 0
    passes: int = 0
    cut_calls: int = 0
    wall_time: float = 0.0


@dataclass
class CostReport:
    """Cost of a clustering with its lower-bound certificate and run metrics."""

    cost: float
    lower_bound: float
    tree: HCTree
    lower_bound_certified: bool
    metrics: RunMetrics = field(default_factory=RunMetrics)
    cost_on_graph: float | None = None

    @property
    def ratio_certificate(self) -> float | None:
        if self.lower_bound <= 0:
            return None
        return self.cost / self.lower_bound

    def to_dict(self, include_timing: bool = True) -> dict[str, Any]:
        metrics = {
            "words_peak": self.metrics.words_peak,
            "passes": self.metrics.passes,
            "cut_calls": self.metrics.cut_calls,
        }
        if include_timing:
            metrics["wall_time"] = round(self.metrics.wall_time, 6)
        return {
            "cost": self.cost,
            "lower_bound": self.lower_bound,
            "lower_bound_certified": self.lower_bound_certified,
            "ratio_certificate": self.ratio_certificate,
            "cost_on_graph": self.cost_on_graph,
            "depth": self.tree.depth,
            "tree": str(self.tree),
            "metrics": metrics,
        }


def solve(g: WeightedGraph, beta: float = DEFAULT_BETA, finder: CutFinder | None = None) -> CostReport:
    """Offline pipeline: recursive balanced clustering plus the lower bound."""
    finder = finder or CutFinder()
    started = time.perf_counter()
    tree, cut_calls = grow_balanced_tree(g, beta, finder)
    lower = lower_bound_balanced(g, finder)
    report = CostReport(
        cost=cost_lca(g, tree),
        lower_bound=lower,
        tree=tree,
        lower_bound_certified=finder.runs_exact(g.n),
        metrics=RunMetrics(
            words_peak=WORDS_PER_EDGE * g.m,
            passes=1,
            cut_calls=cut_calls,
            wall_time=time.perf_counter() - started,
        ),
    )
    logger.info("Clustered n=%d m=%d: cost=%g lower bound=%g", g.n, g.m, report.cost, lower)
    return report
