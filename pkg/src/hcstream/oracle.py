"""Exponential-time ground truth for small graphs.

The subset DP computes opt(S) = min over bipartitions (A, S∖A) of
w(A, S∖A)·|S| + opt(A) + opt(S∖A), visiting each unordered bipartition once
by requiring A to contain the lowest vertex of S.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from hcstream.errors import InvalidArgumentError, SizeLimitError
from hcstream.graph import (
    Cut,
    WeightedGraph,
    crossing_table,
    mask_members,
    popcount_table,
    subset_weight_table,
)
from hcstream.tree import (
    HCTree,
    balanced_side_limit,
    cost_lca,
    enumerate_binary_trees,
    grow_tree,
)

logger = logging.getLogger(__name__)

ORACLE_CAP = 16
EXACT_CUT_CAP = 20
ALL_TREES_CAP = 8

Bipartition = tuple[frozenset[int], frozenset[int]]


@dataclass
class OptResult:
    """Optimal Dasgupta cost, one optimal tree and every optimal root split."""

    value: float
    tree: HCTree
    optimal_root_cuts: list[Bipartition] = field(default_factory=list)

    def to_dict(self) -> dict[str, object]:
        return {
            "value": self.value,
            "tree": str(self.tree),
            "optimal_root_cuts": [[sorted(a), sorted(b)] for a, b in self.optimal_root_cuts],
        }


def _submasks_with_low_bit(subset: int, n: int) -> np.ndarray:
    """Proper submasks of subset that contain its lowest set bit, ascending."""
    bits = [j for j in range(n) if subset >> j & 1]
    rest = np.zeros(1, dtype=np.int64)
    for j in bits[1:]:
        rest = np.concatenate([rest, rest + (1 << j)])
    return rest[:-1] | (1 << bits[0])


def brute_force_opt(g: WeightedGraph, cap: int = ORACLE_CAP) -> OptResult:
    """Exact optimum by dynamic programming over vertex subsets."""
    n = g.n
    if n == 0:
        raise InvalidArgumentError("The optimum is undefined on an empty graph")
    if n > cap:
        raise SizeLimitError(f"Subset DP runs in O(3^n); n={n} is above the oracle cap {cap}")
    if n == 1:
        return OptResult(0.0, HCTree.from_nested(0), [])

    inside = subset_weight_table(g.dense())
    sizes = popcount_table(n)
    full = (1 << n) - 1
    opt = np.zeros(1 << n)
    choice = np.zeros(1 << n, dtype=np.int64)
    root_values = root_sides = None

    for subset in range(3, full + 1):
        if sizes[subset] < 2:
            continue
        sides = _submasks_with_low_bit(subset, n)
        others = subset ^ sides
        values = (inside[subset] - inside[sides] - inside[others]) * sizes[subset]
        values += opt[sides] + opt[others]
        best = int(np.argmin(values))
        opt[subset] = values[best]
        choice[subset] = sides[best]
        if subset == full:
            root_values, root_sides = values, sides

    value = float(opt[full])
    vertices = list(range(n))

    def split(group: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        mask = int(sum(1 << int(x) for x in group))
        side = int(choice[mask])
        return np.array(mask_members(side, vertices)), np.array(mask_members(mask ^ side, vertices))

    tree = HCTree.from_nested(grow_tree(vertices, split))

    tied = np.isclose(root_values, value, rtol=1e-12, atol=1e-9)
    root_cuts = [
        (frozenset(mask_members(int(a), vertices)), frozenset(mask_members(full ^ int(a), vertices)))
        for a in root_sides[tied]
    ]
    logger.debug("Subset DP on n=%d: opt=%g with %d optimal root cuts", n, value, len(root_cuts))
    return OptResult(value, tree, root_cuts)


def all_trees_opt(g: WeightedGraph, cap: int = ALL_TREES_CAP) -> tuple[float, HCTree]:
    """Minimum of cost_lca over every binary tree (independent check of the DP)."""
    if g.n == 0:
        raise InvalidArgumentError("The optimum is undefined on an empty graph")
    if g.n > cap:
        raise SizeLimitError(f"All-trees enumeration is limited to n <= {cap}, got n={g.n}")
    best_value, best_tree = float("inf"), None
    for nested in enumerate_binary_trees(range(g.n)):
        tree = HCTree.from_nested(nested)
        value = cost_lca(g, tree)
        if value < best_value:
            best_value, best_tree = value, tree
    assert best_tree is not None
    return best_value, best_tree


def _as_bipartition(g: WeightedGraph, expected: tuple[Iterable[int], Iterable[int]]) -> Bipartition:
    a, b = (frozenset(int(x) for x in side) for side in expected)
    if not a or not b or a & b or (a | b) != frozenset(range(g.n)):
        raise InvalidArgumentError("Expected split must be a bipartition of the vertex set")
    return a, b


def verify_first_split(
    g: WeightedGraph,
    expected: tuple[Iterable[int], Iterable[int]],
    cap: int = ORACLE_CAP,
) -> bool:
    """True iff expected is among the optimal root cuts (order of sides ignored)."""
    a, b = _as_bipartition(g, expected)
    target = {a, b}
    return any({x, y} == target for x, y in brute_force_opt(g, cap).optimal_root_cuts)


def exact_balanced_min_cut(
    g: WeightedGraph,
    subset: Iterable[int],
    beta: float,
    cap: int = EXACT_CUT_CAP,
) -> Cut:
    """Minimum-weight β-balanced bipartition of the subgraph induced by subset.

    Ties go to the numerically smallest side-a bitmask over the sorted subset.
    """
    if not 0 < beta <= 0.5:
        raise InvalidArgumentError(f"beta must lie in (0, 1/2], got {beta}")
    sub, ids = g.induced(subset)
    k = sub.n
    if k < 2:
        raise InvalidArgumentError("No balanced bipartition exists for fewer than 2 vertices")
    if k > cap:
        raise SizeLimitError(f"Exact balanced cut enumerates 2^k splits; k={k} is above the cap {cap}")

    crossing = crossing_table(sub.dense())
    sizes = popcount_table(k)
    limit = balanced_side_limit(k, beta)
    candidates = np.flatnonzero((sizes >= k - limit) & (sizes <= limit))
    best = int(candidates[np.argmin(crossing[candidates])])
    side_a = mask_members(best, ids)
    side_b = mask_members(((1 << k) - 1) ^ best, ids)
    return Cut(frozenset(side_a), frozenset(side_b), float(crossing[best]))
