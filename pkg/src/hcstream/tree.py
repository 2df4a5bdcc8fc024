"""Hierarchical clustering trees and Dasgupta's cost.

Tree text format: a leaf is a decimal vertex id, an internal node is
'(' child (',' child)+ ')'. Whitespace is ignored. Example: "((0,1),(2,3))".
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Any, Union

import numpy as np

from hcstream.errors import InvalidArgumentError, ParseError, ShapeError, StructureError
from hcstream.graph import WeightedGraph

Nested = Union[int, Sequence["Nested"]]

BALANCE_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class HCTree:
    """Rooted tree whose leaves are the vertices 0..n-1.

    Nodes live in an arena numbered in preorder: the root is node 0 and every
    subtree occupies a contiguous id range, so the leaves under a node form a
    contiguous slice of ``leaf_order``.
    """

    children: tuple[tuple[int, ...], ...]
    leaf: tuple[int, ...]
    root: int = 0

    @classmethod
    def from_nested(cls, nested: Nested) -> HCTree:
        """Build a tree from nested ints and sequences, e.g. ((0, 1), 2)."""
        kids: list[list[int]] = []
        leaf: list[int] = []
        stack: list[tuple[Any, int]] = [(nested, -1)]
        while stack:
            item, parent = stack.pop()
            node = len(leaf)
            kids.append([])
            if isinstance(item, (int, np.integer)):
                leaf.append(int(item))
            else:
                items = list(item)
                if len(items) < 2:
                    raise StructureError("An internal node needs at least two children")
                leaf.append(-1)
                for child in reversed(items):
                    stack.append((child, node))
            if parent >= 0:
                kids[parent].append(node)

        ids = sorted(x for x in leaf if x >= 0)
        if ids != list(range(len(ids))):
            raise StructureError("Tree leaves must be exactly the vertex ids 0..n-1, each once")
        return cls(tuple(tuple(k) for k in kids), tuple(leaf))

    # -------------------------------------------------------------------------
    # Cached structure
    # -------------------------------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self.leaf)

    @cached_property
    def n(self) -> int:
        return sum(1 for x in self.leaf if x >= 0)

    @cached_property
    def leaf_count(self) -> np.ndarray:
        counts = np.zeros(self.node_count, dtype=np.int64)
        for node in range(self.node_count - 1, -1, -1):
            kids = self.children[node]
            counts[node] = 1 if not kids else sum(counts[c] for c in kids)
        return counts

    @cached_property
    def leaf_order(self) -> np.ndarray:
        """Vertices in left-to-right leaf order."""
        return np.array([x for x in self.leaf if x >= 0], dtype=np.int64)

    @cached_property
    def position(self) -> np.ndarray:
        """Index of every vertex within leaf_order."""
        pos = np.empty(self.n, dtype=np.int64)
        pos[self.leaf_order] = np.arange(self.n)
        return pos

    @cached_property
    def span_start(self) -> np.ndarray:
        """First leaf_order index covered by each node."""
        is_leaf = np.array([x >= 0 for x in self.leaf], dtype=np.int64)
        return np.concatenate([[0], np.cumsum(is_leaf)[:-1]])

    @cached_property
    def internal_nodes(self) -> list[int]:
        return [node for node, kids in enumerate(self.children) if kids]

    @cached_property
    def is_binary(self) -> bool:
        return all(len(self.children[node]) == 2 for node in self.internal_nodes)

    @cached_property
    def depth(self) -> int:
        height = [0] * self.node_count
        for node in range(self.node_count - 1, -1, -1):
            kids = self.children[node]
            if kids:
                height[node] = 1 + max(height[c] for c in kids)
        return height[self.root]

    def span(self, node: int) -> tuple[int, int]:
        start = int(self.span_start[node])
        return start, start + int(self.leaf_count[node])

    def leaves(self, node: int) -> np.ndarray:
        """Vertices under node."""
        lo, hi = self.span(node)
        return self.leaf_order[lo:hi]

    def to_nested(self) -> Nested:
        built: list[Any] = [None] * self.node_count
        for node in range(self.node_count - 1, -1, -1):
            kids = self.children[node]
            built[node] = self.leaf[node] if not kids else tuple(built[c] for c in kids)
        return built[self.root]

    def __str__(self) -> str:
        return format_tree(self)


@dataclass(frozen=True)
class TreeCut:
    """The cut a binary internal node makes between its two children."""

    node: int
    small_side: frozenset[int]
    large_side: frozenset[int]


# =============================================================================
# Text format
# =============================================================================


def format_tree(t: HCTree) -> str:
    parts: list[str] = []
    stack: list[tuple[bool, Any]] = [(False, t.root)]
    while stack:
        is_text, item = stack.pop()
        if is_text:
            parts.append(item)
            continue
        kids = t.children[item]
        if not kids:
            parts.append(str(t.leaf[item]))
            continue
        stack.append((True, ")"))
        for i in range(len(kids) - 1, -1, -1):
            stack.append((False, kids[i]))
            if i > 0:
                stack.append((True, ","))
        stack.append((True, "("))
    return "".join(parts)


def parse_tree(text: str) -> HCTree:
    """Parse the tree text format."""
    open_nodes: list[list[Any]] = []
    result: Any = None
    expect_item = True
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "(":
            if not expect_item:
                raise ParseError(f"unexpected '(' at position {i}")
            open_nodes.append([])
            i += 1
            continue
        if ch.isdigit():
            if not expect_item:
                raise ParseError(f"unexpected vertex id at position {i}")
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            item: Any = int(text[i:j])
            i = j
        elif ch == ")":
            if expect_item or not open_nodes:
                raise ParseError(f"unexpected ')' at position {i}")
            item = open_nodes.pop()
            if len(item) < 2:
                raise ParseError(f"internal node closed at position {i} has fewer than two children")
            i += 1
        elif ch == ",":
            if expect_item or not open_nodes:
                raise ParseError(f"unexpected ',' at position {i}")
            expect_item = True
            i += 1
            continue
        else:
            raise ParseError(f"unexpected character {ch!r} at position {i}")

        if open_nodes:
            open_nodes[-1].append(item)
        elif result is None:
            result = item
        else:
            raise ParseError(f"trailing input at position {i}")
        expect_item = False

    if open_nodes:
        raise ParseError("unbalanced parentheses")
    if result is None:
        raise ParseError("empty tree")
    return HCTree.from_nested(result)


# =============================================================================
# Cost functions
# =============================================================================


def _check_leaves(g: WeightedGraph, t: HCTree) -> None:
    if t.n != g.n:
        raise StructureError(f"Tree has {t.n} leaves but the graph has {g.n} vertices")


def _require_binary(t: HCTree) -> None:
    if not t.is_binary:
        raise ShapeError("Tree has a node with more than two children; binarize it first")


def _range_max(values: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Maximum of values[lo:hi] for every query pair (hi > lo)."""
    table = [values]
    span = 1
    while 2 * span <= len(values):
        prev = table[-1]
        table.append(np.maximum(prev[:-span], prev[span:]))
        span *= 2
    length = hi - lo
    level = np.floor(np.log2(length)).astype(np.int64)
    out = np.empty(len(lo), dtype=values.dtype)
    for k in np.unique(level):
        sel = level == k
        row = table[k]
        out[sel] = np.maximum(row[lo[sel]], row[hi[sel] - (1 << int(k))])
    return out


def lca_nodes(g: WeightedGraph, t: HCTree) -> np.ndarray:
    """Lowest common ancestor node of every edge of g."""
    _check_leaves(g, t)
    stride = t.node_count + 1
    # separator between leaf_order[i] and leaf_order[i+1], keyed by (leaf count, node)
    separators = np.zeros(max(t.n - 1, 1), dtype=np.int64)
    for node in t.internal_nodes:
        key = int(t.leaf_count[node]) * stride + node
        for child in t.children[node][:-1]:
            separators[t.span(child)[1] - 1] = key
    pu, pv = t.position[g.u], t.position[g.v]
    keys = _range_max(separators, np.minimum(pu, pv), np.maximum(pu, pv))
    return keys % stride


def cost_lca(g: WeightedGraph, t: HCTree) -> float:
    """Dasgupta cost: sum over edges of w(e) times the leaf count of lca(u, v)."""
    _check_leaves(g, t)
    if g.m == 0:
        return 0.0
    sizes = t.leaf_count[lca_nodes(g, t)]
    return float(np.dot(g.w, sizes))


def cost_cuts(g: WeightedGraph, t: HCTree) -> float:
    """Dasgupta cost as the sum over binary nodes of w(A, B) * |A ∪ B|."""
    _check_leaves(g, t)
    _require_binary(t)
    adj = g.adjacency
    pos = t.position
    total = 0.0
    for node in t.internal_nodes:
        left, right = t.children[node]
        lo_l, hi_l = t.span(left)
        lo_r, hi_r = t.span(right)
        if hi_l - lo_l <= hi_r - lo_r:
            rows, other = t.leaf_order[lo_l:hi_l], (lo_r, hi_r)
        else:
            rows, other = t.leaf_order[lo_r:hi_r], (lo_l, hi_l)
        block = adj[rows]
        where = pos[block.indices]
        crossing = block.data[(where >= other[0]) & (where < other[1])].sum()
        total += float(crossing) * int(t.leaf_count[node])
    return total


def w_functional(g: WeightedGraph, t: HCTree) -> float:
    """Sum over binary nodes of ½(w(A, Ā) + w(B, B̄)) * |A ∪ B|, cuts taken in g."""
    _check_leaves(g, t)
    _require_binary(t)
    inside = np.zeros(t.node_count)
    if g.m:
        inside += np.bincount(lca_nodes(g, t), weights=g.w, minlength=t.node_count)
    for node in range(t.node_count - 1, -1, -1):
        for child in t.children[node]:
            inside[node] += inside[child]
    cumulative = np.concatenate([[0.0], np.cumsum(g.degrees[t.leaf_order])])
    starts = t.span_start
    ends = starts + t.leaf_count
    boundary = cumulative[ends] - cumulative[starts] - 2.0 * inside
    total = 0.0
    for node in t.internal_nodes:
        left, right = t.children[node]
        total += 0.5 * (boundary[left] + boundary[right]) * int(t.leaf_count[node])
    return float(total)


def cost_by_depth(g: WeightedGraph, t: HCTree) -> np.ndarray:
    """Cost contributed by the nodes at each depth (root = depth 0)."""
    _check_leaves(g, t)
    node_depth = np.zeros(t.node_count, dtype=np.int64)
    for node in range(t.node_count):
        for child in t.children[node]:
            node_depth[child] = node_depth[node] + 1
    levels = max(t.depth, 1)
    if g.m == 0:
        return np.zeros(levels)
    lca = lca_nodes(g, t)
    return np.bincount(node_depth[lca], weights=g.w * t.leaf_count[lca], minlength=levels)


def tree_cuts(t: HCTree) -> list[TreeCut]:
    """Cut of every binary node; on equal sizes the small side holds the smallest vertex."""
    _require_binary(t)
    cuts = []
    for node in t.internal_nodes:
        left, right = (frozenset(int(x) for x in t.leaves(c)) for c in t.children[node])
        if len(left) > len(right) or (len(left) == len(right) and min(right) < min(left)):
            left, right = right, left
        cuts.append(TreeCut(node, left, right))
    return cuts


def binarize(t: HCTree) -> HCTree:
    """Left-comb every multiway node; binary trees come back unchanged."""
    built: list[Any] = [None] * t.node_count
    for node in range(t.node_count - 1, -1, -1):
        kids = t.children[node]
        if not kids:
            built[node] = t.leaf[node]
            continue
        combed = built[kids[0]]
        for child in kids[1:]:
            combed = (combed, built[child])
        built[node] = combed
    return HCTree.from_nested(built[t.root])


# =============================================================================
# Balance
# =============================================================================


def _check_beta(beta: float) -> None:
    if not 0 < beta < 1:
        raise InvalidArgumentError(f"beta must lie in (0, 1), got {beta}")


def balanced_side_limit(size: int, beta: float) -> int:
    """Largest side allowed when splitting size vertices.

    Falls back to the most balanced split when no β-balanced split exists.
    """
    _check_beta(beta)
    limit = math.floor((1 - beta) * size + BALANCE_TOLERANCE)
    return max(limit, (size + 1) // 2)


def is_beta_balanced(t: HCTree, beta: float) -> bool:
    """True iff every node's larger child stays within balanced_side_limit of its leaves.

    Nodes where no split is β-balanced (odd sizes at β = 1/2) accept the
    most balanced split.
    """
    _check_beta(beta)
    _require_binary(t)
    for node in t.internal_nodes:
        larger = max(int(t.leaf_count[c]) for c in t.children[node])
        if larger > balanced_side_limit(int(t.leaf_count[node]), beta):
            return False
    return True


# =============================================================================
# Tree builders
# =============================================================================

Splitter = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


def grow_tree(vertices: Sequence[int] | np.ndarray, split: Splitter) -> Nested:
    """Top-down construction: split every vertex group of size >= 2 until singletons."""
    verts = np.asarray(vertices, dtype=np.int64)
    if len(verts) == 0:
        raise InvalidArgumentError("Cannot build a tree on an empty vertex set")
    holder: list[Any] = [None]
    stack: list[tuple[np.ndarray, list[Any], int]] = [(verts, holder, 0)]
    while stack:
        group, parent, slot = stack.pop()
        if len(group) == 1:
            parent[slot] = int(group[0])
            continue
        left, right = split(group)
        node: list[Any] = [None, None]
        parent[slot] = node
        stack.append((np.asarray(right, dtype=np.int64), node, 1))
        stack.append((np.asarray(left, dtype=np.int64), node, 0))
    return holder[0]


def balanced_tree(vertices: Sequence[int] | np.ndarray) -> Nested:
    """Perfectly balanced binary tree halving the given order."""
    return grow_tree(vertices, lambda group: (group[: len(group) // 2], group[len(group) // 2 :]))


def random_binary_tree(vertices: Sequence[int] | np.ndarray, rng: np.random.Generator) -> Nested:
    def split(group: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        shuffled = rng.permutation(group)
        at = int(rng.integers(1, len(group)))
        return shuffled[:at], shuffled[at:]

    return grow_tree(vertices, split)


def random_balanced_tree(
    vertices: Sequence[int] | np.ndarray, beta: float, rng: np.random.Generator
) -> Nested:
    """Random tree whose every split respects balanced_side_limit."""

    def split(group: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        size = len(group)
        limit = balanced_side_limit(size, beta)
        at = int(rng.integers(size - limit, limit + 1))
        shuffled = rng.permutation(group)
        return shuffled[:at], shuffled[at:]

    return grow_tree(vertices, split)


def enumerate_binary_trees(vertices: Sequence[int]) -> Iterator[Nested]:
    """Every rooted binary tree on the given leaves, each exactly once."""
    vs = list(vertices)
    if len(vs) == 1:
        yield vs[0]
        return
    first, rest = vs[0], vs[1:]
    for r in range(len(rest)):
        for chosen in combinations(rest, r):
            left = [first, *chosen]
            right = [x for x in rest if x not in chosen]
            for left_tree in enumerate_binary_trees(left):
                for right_tree in enumerate_binary_trees(right):
                    yield (left_tree, right_tree)
