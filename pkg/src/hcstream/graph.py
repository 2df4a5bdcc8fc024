"""Weighted undirected graphs, cuts, edge expansion and the edge-list file format.

Graph file format: first line "<n> <m>", then m lines "<u> <v> <w>" with 0-based
vertex ids and a decimal weight. Lines starting with '#' are ignored.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from hcstream.errors import InvalidArgumentError, ParseError, SizeLimitError

logger = logging.getLogger(__name__)

EXPANSION_CAP = 20
WORDS_PER_EDGE = 3


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Immutable weighted undirected graph on vertices 0..n-1.

    Edges are stored canonically (u < v, sorted by (u, v)) with parallel
    input edges merged by summing their weights.
    """

    n: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, float]]) -> WeightedGraph:
        """Build a graph from (u, v, w) triples, merging parallel edges."""
        rows = list(edges)
        if not rows:
            return cls.from_arrays(n, np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0))
        u, v, w = zip(*rows)
        return cls.from_arrays(
            n,
            np.asarray(u, dtype=np.int64),
            np.asarray(v, dtype=np.int64),
            np.asarray(w, dtype=np.float64),
        )

    @classmethod
    def from_arrays(
        cls, n: int, u: np.ndarray, v: np.ndarray, w: np.ndarray
    ) -> WeightedGraph:
        """Build a graph from parallel endpoint/weight arrays, merging parallel edges."""
        if n < 0:
            raise InvalidArgumentError(f"Vertex count must be nonnegative, got {n}")
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        w = np.asarray(w, dtype=np.float64)
        if not (u.shape == v.shape == w.shape):
            raise InvalidArgumentError("Endpoint and weight arrays differ in length")
        if len(u):
            if u.min() < 0 or v.min() < 0 or u.max() >= n or v.max() >= n:
                raise InvalidArgumentError(f"Vertex id out of range for n={n}")
            if np.any(u == v):
                raise InvalidArgumentError("Self-loops are not allowed")
            if not np.all(np.isfinite(w)) or np.any(w <= 0):
                raise InvalidArgumentError("Edge weights must be finite and positive")

        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        if len(lo) == 0:
            empty = np.empty(0, np.int64)
            return cls(n, _frozen(empty), _frozen(empty.copy()), _frozen(np.empty(0)))
        keys, inverse = np.unique(lo * n + hi, return_inverse=True)
        merged = np.bincount(inverse.ravel(), weights=w, minlength=len(keys))
        return cls(
            n,
            _frozen(keys // n),
            _frozen(keys % n),
            _frozen(merged.astype(np.float64)),
        )

    # -------------------------------------------------------------------------
    # Views
    # -------------------------------------------------------------------------

    @property
    def m(self) -> int:
        return len(self.u)

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return [(int(a), int(b), float(c)) for a, b, c in zip(self.u, self.v, self.w)]

    @cached_property
    def total_weight(self) -> float:
        return float(self.w.sum())

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric sparse adjacency matrix."""
        rows = np.concatenate([self.u, self.v])
        cols = np.concatenate([self.v, self.u])
        data = np.concatenate([self.w, self.w])
        mat = sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))
        mat.sort_indices()
        return mat

    @cached_property
    def degrees(self) -> np.ndarray:
        """Weighted degree of every vertex."""
        deg = np.bincount(self.u, weights=self.w, minlength=self.n)
        deg += np.bincount(self.v, weights=self.w, minlength=self.n)
        return _frozen(deg)

    def neighbors(self, vertex: int) -> dict[int, float]:
        """Weighted neighbor map of one vertex."""
        adj = self.adjacency
        start, end = adj.indptr[vertex], adj.indptr[vertex + 1]
        return {int(x): float(y) for x, y in zip(adj.indices[start:end], adj.data[start:end])}

    def dense(self) -> np.ndarray:
        """Dense adjacency matrix (small graphs only)."""
        mat = np.zeros((self.n, self.n))
        mat[self.u, self.v] = self.w
        mat[self.v, self.u] = self.w
        return mat

    # -------------------------------------------------------------------------
    # Derived graphs
    # -------------------------------------------------------------------------

    def induced(self, vertices: Iterable[int] | np.ndarray) -> tuple[WeightedGraph, np.ndarray]:
        """Induced subgraph relabelled to 0..k-1, plus the array mapping local ids back."""
        keep_ids = np.unique(np.fromiter(vertices, dtype=np.int64))
        position = np.full(self.n, -1, dtype=np.int64)
        position[keep_ids] = np.arange(len(keep_ids))
        pu = position[self.u]
        pv = position[self.v]
        mask = (pu >= 0) & (pv >= 0)
        # relabelling by sorted ids keeps the canonical edge order
        sub = WeightedGraph(
            len(keep_ids),
            _frozen(pu[mask]),
            _frozen(pv[mask]),
            _frozen(self.w[mask].copy()),
        )
        return sub, keep_ids

    def scaled(self, factor: float) -> WeightedGraph:
        if factor <= 0:
            raise InvalidArgumentError(f"Scale factor must be positive, got {factor}")
        return WeightedGraph(self.n, self.u, self.v, _frozen(self.w * factor))

    def components(self) -> list[np.ndarray]:
        """Connected components as sorted vertex arrays, ordered by smallest vertex."""
        if self.n == 0:
            return []
        count, labels = connected_components(self.adjacency, directed=False)
        order = np.argsort(labels, kind="stable")
        bounds = np.cumsum(np.bincount(labels, minlength=count))[:-1]
        groups = np.split(order, bounds)
        groups.sort(key=lambda c: int(c[0]))
        return groups

    def __repr__(self) -> str:
        return f"WeightedGraph(n={self.n}, m={self.m}, total_weight={self.total_weight:g})"


def relabel(g: WeightedGraph, permutation: np.ndarray) -> WeightedGraph:
    """Rename vertex x to permutation[x]."""
    perm = np.asarray(permutation, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(g.n)):
        raise InvalidArgumentError("Relabelling must be a permutation of the vertex set")
    return WeightedGraph.from_arrays(g.n, perm[g.u], perm[g.v], g.w)


# =============================================================================
# Cuts
# =============================================================================


@dataclass(frozen=True)
class Cut:
    """A bipartition (side_a, side_b) of a vertex subset with its crossing weight."""

    side_a: frozenset[int]
    side_b: frozenset[int]
    weight: float

    def __post_init__(self) -> None:
        if not self.side_a or not self.side_b:
            raise InvalidArgumentError("Both sides of a cut must be nonempty")
        if self.side_a & self.side_b:
            raise InvalidArgumentError("Cut sides must be disjoint")

    @property
    def size(self) -> int:
        return len(self.side_a) + len(self.side_b)

    @property
    def larger_side(self) -> int:
        return max(len(self.side_a), len(self.side_b))

    def to_dict(self) -> dict[str, object]:
        return {
            "side_a": sorted(self.side_a),
            "side_b": sorted(self.side_b),
            "weight": self.weight,
        }


def _membership(g: WeightedGraph, vertices: Iterable[int]) -> np.ndarray:
    mask = np.zeros(g.n, dtype=bool)
    ids = np.fromiter((int(x) for x in vertices), dtype=np.int64)
    if len(ids) and (ids.min() < 0 or ids.max() >= g.n):
        raise InvalidArgumentError(f"Vertex id out of range for n={g.n}")
    mask[ids] = True
    return mask


def cut_weight(g: WeightedGraph, a: Iterable[int], b: Iterable[int]) -> float:
    """Total weight of edges with one endpoint in a and the other in b."""
    a_set, b_set = set(a), set(b)
    if not a_set or not b_set:
        raise InvalidArgumentError("Cut sides must be nonempty")
    if a_set & b_set:
        raise InvalidArgumentError("Cut sides overlap")
    in_a = _membership(g, a_set)
    in_b = _membership(g, b_set)
    crossing = (in_a[g.u] & in_b[g.v]) | (in_b[g.u] & in_a[g.v])
    return float(g.w[crossing].sum())


def make_cut(g: WeightedGraph, side_a: Iterable[int], side_b: Iterable[int]) -> Cut:
    """Build a Cut with its weight evaluated in g."""
    a, b = frozenset(int(x) for x in side_a), frozenset(int(x) for x in side_b)
    return Cut(a, b, cut_weight(g, a, b))


def sweep_cuts(g: WeightedGraph, order: np.ndarray) -> np.ndarray:
    """Cut weight of every proper prefix of a vertex order.

    Entry p-1 is the weight between the first p vertices and the rest, for p in 1..n-1.
    """
    n = g.n
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    ru, rv = rank[g.u], rank[g.v]
    lo = np.minimum(ru, rv)
    hi = np.maximum(ru, rv)
    diff = np.bincount(lo + 1, weights=g.w, minlength=n + 2)
    diff -= np.bincount(hi + 1, weights=g.w, minlength=n + 2)
    return np.cumsum(diff)[1:n]


# =============================================================================
# Subset tables (exact enumeration helpers)
# =============================================================================


def subset_weight_table(adj: np.ndarray) -> np.ndarray:
    """Internal edge weight of every vertex subset of a dense k x k matrix, by bitmask."""
    k = adj.shape[0]
    table = np.zeros(1 << k)
    for vertex in range(k):
        size = 1 << vertex
        to_vertex = np.zeros(size)
        for j in range(vertex):
            to_vertex[1 << j : 1 << (j + 1)] = to_vertex[: 1 << j] + adj[vertex, j]
        table[size : 2 * size] = table[:size] + to_vertex
    return table


def popcount_table(k: int) -> np.ndarray:
    """Number of set bits of every k-bit mask."""
    counts = np.zeros(1 << k, dtype=np.int64)
    for j in range(k):
        counts[1 << j : 1 << (j + 1)] = counts[: 1 << j] + 1
    return counts


def mask_members(mask: int, vertices: np.ndarray | list[int]) -> list[int]:
    """Vertices selected by the bits of mask."""
    return [int(vertices[j]) for j in range(len(vertices)) if mask >> j & 1]


def crossing_table(adj: np.ndarray) -> np.ndarray:
    """Weight between every subset and its complement, by bitmask."""
    table = subset_weight_table(adj)
    full = len(table) - 1
    masks = np.arange(len(table))
    crossing = table[full] - table - table[full ^ masks]
    return np.maximum(crossing, 0.0)


# =============================================================================
# Edge expansion
# =============================================================================


@dataclass(frozen=True)
class ExpansionEstimate:
    """Edge expansion value realised by a witnessed cut."""

    certified_upper: float
    heuristic_lower: float
    witness: Cut
    exact: bool

    def to_dict(self) -> dict[str, object]:
        return {
            "certified_upper": self.certified_upper,
            "heuristic_lower": self.heuristic_lower,
            "exact": self.exact,
            "witness": self.witness.to_dict(),
        }


def exact_expansion(g: WeightedGraph, cap: int = EXPANSION_CAP) -> ExpansionEstimate:
    """Minimise w(S, S̄)/|S| over all nonempty S with |S| <= n/2."""
    if g.n < 2:
        raise InvalidArgumentError("Edge expansion needs at least 2 vertices")
    if g.n > cap:
        raise SizeLimitError(
            f"Exact expansion enumerates 2^n subsets; n={g.n} is above the cap {cap}. "
            "Use approx_expansion instead."
        )
    crossing = crossing_table(g.dense())
    sizes = popcount_table(g.n)
    feasible = (sizes >= 1) & (sizes <= g.n // 2)
    ratios = np.full(len(crossing), np.inf)
    ratios[feasible] = crossing[feasible] / sizes[feasible]
    best = int(np.argmin(ratios))
    side_a = mask_members(best, list(range(g.n)))
    side_b = [x for x in range(g.n) if not best >> x & 1]
    witness = Cut(frozenset(side_a), frozenset(side_b), float(crossing[best]))
    value = float(ratios[best])
    return ExpansionEstimate(value, value, witness, exact=True)


def fiedler_vector(
    g: WeightedGraph,
    seed: int = 0,
    iterations: int = 300,
    tol: float = 1e-9,
) -> tuple[np.ndarray, float, bool]:
    """Second eigenvector of the normalized Laplacian by deflated power iteration.

    Returns the embedding D^{-1/2}x, the Rayleigh estimate of lambda_2 and
    whether the iteration converged. The graph must have no isolated vertex.
    """
    n = g.n
    deg = np.asarray(g.degrees, dtype=np.float64)
    root = np.sqrt(deg)
    inv_root = np.divide(1.0, root, out=np.zeros(n), where=root > 0)
    adj = g.adjacency
    top = root / np.linalg.norm(root)

    def shifted(x: np.ndarray) -> np.ndarray:
        # (I + D^-1/2 A D^-1/2) / 2 has spectrum in [0, 1]
        return 0.5 * (x + inv_root * (adj @ (inv_root * x)))

    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    x -= (x @ top) * top
    x /= np.linalg.norm(x)
    converged = False
    for _ in range(iterations):
        y = shifted(x)
        y -= (y @ top) * top
        norm = np.linalg.norm(y)
        if norm == 0 or not np.isfinite(norm):
            break
        y /= norm
        delta = np.linalg.norm(y - x)
        x = y
        if delta < tol:
            converged = True
            break
    lambda_2 = float(2.0 * (1.0 - x @ shifted(x)))
    return inv_root * x, max(lambda_2, 0.0), converged


def approx_expansion(g: WeightedGraph, sweep_rounds: int = 32, seed: int = 0) -> ExpansionEstimate:
    """Upper-bound the edge expansion by spectral sweep and random balanced cuts."""
    n = g.n
    if n < 2:
        raise InvalidArgumentError("Edge expansion needs at least 2 vertices")
    all_vertices = np.arange(n)

    components = g.components()
    if len(components) > 1:
        smallest = min(components, key=len)
        rest = np.setdiff1d(all_vertices, smallest)
        witness = Cut(frozenset(smallest.tolist()), frozenset(rest.tolist()), 0.0)
        return ExpansionEstimate(0.0, 0.0, witness, exact=False)

    embedding, lambda_2, converged = fiedler_vector(g, seed=seed)
    if not converged:
        logger.debug("Power iteration did not converge on n=%d; using the last iterate", n)
    order = np.argsort(embedding, kind="stable")
    prefix = np.arange(1, n)
    ratios = sweep_cuts(g, order) / np.minimum(prefix, n - prefix)
    best_p = int(np.argmin(ratios)) + 1
    best_ratio = float(ratios[best_p - 1])
    best_side = order[:best_p]

    rng = np.random.default_rng(seed)
    for _ in range(sweep_rounds):
        side = rng.permutation(n)[: n // 2]
        mask = np.zeros(n, dtype=bool)
        mask[side] = True
        weight = float(g.w[mask[g.u] != mask[g.v]].sum())
        ratio = weight / len(side)
        if ratio < best_ratio:
            best_ratio, best_side = ratio, side

    side_a = frozenset(int(x) for x in best_side)
    side_b = frozenset(range(n)) - side_a
    witness = make_cut(g, side_a, side_b)
    certified = witness.weight / min(len(side_a), len(side_b))
    heuristic = lambda_2 / 2.0 * float(np.min(g.degrees))
    return ExpansionEstimate(certified, heuristic, witness, exact=False)


# =============================================================================
# File I/O
# =============================================================================


def _parse_edge_line(parts: list[str], line_no: int, n: int) -> tuple[int, int, float]:
    if len(parts) != 3:
        raise ParseError(f"expected '<u> <v> <w>', got {' '.join(parts)!r}", line_no)
    try:
        a, b = int(parts[0]), int(parts[1])
        weight = float(parts[2])
    except ValueError as e:
        raise ParseError(f"malformed edge: {e}", line_no) from e
    if not (0 <= a < n and 0 <= b < n):
        raise ParseError(f"vertex id out of range for n={n}", line_no)
    if a == b:
        raise ParseError(f"self-loop on vertex {a}", line_no)
    if not math.isfinite(weight) or weight <= 0:
        raise ParseError(f"nonpositive weight {parts[2]}", line_no)
    return a, b, weight


class EdgeFileReader:
    """Lazy reader for the edge-list format.

    The header is read on construction; iterating yields validated edges and
    records how many were found in ``count``.
    """

    def __init__(self, path: Path):
        self.path = Path(path)
        if not self.path.is_file():
            raise ParseError(f"graph file not found: {self.path}")
        self.count = 0
        self._header_line = 0
        self.n, self.m = self._read_header()

    def _lines(self) -> Iterator[tuple[int, list[str]]]:
        try:
            with self.path.open("r", encoding="utf-8") as f:
                for line_no, raw in enumerate(f, start=1):
                    text = raw.strip()
                    if not text or text.startswith("#"):
                        continue
                    yield line_no, text.split()
        except UnicodeDecodeError as e:
            raise ParseError(f"graph file {self.path} is not valid UTF-8: {e.reason}") from e
        except OSError as e:
            raise ParseError(f"cannot read graph file {self.path}: {e.strerror}") from e

    def _read_header(self) -> tuple[int, int]:
        for line_no, parts in self._lines():
            self._header_line = line_no
            if len(parts) != 2:
                raise ParseError("header must be '<n> <m>'", line_no)
            try:
                n, m = int(parts[0]), int(parts[1])
            except ValueError as e:
                raise ParseError(f"malformed header: {e}", line_no) from e
            if n < 0 or m < 0:
                raise ParseError("header counts must be nonnegative", line_no)
            return n, m
        raise ParseError("empty graph file: missing '<n> <m>' header")

    def __iter__(self) -> Iterator[tuple[int, int, float]]:
        self.count = 0
        for line_no, parts in self._lines():
            if line_no <= self._header_line:
                continue
            edge = _parse_edge_line(parts, line_no, self.n)
            self.count += 1
            yield edge


def iter_edge_file(path: Path) -> tuple[tuple[int, int], Iterator[tuple[int, int, float]]]:
    """Declared (n, m) header and a lazy iterator over the file's edges."""
    reader = EdgeFileReader(path)
    return (reader.n, reader.m), iter(reader)


def load_graph(path: Path) -> WeightedGraph:
    """Read a graph file, merging parallel edges."""
    reader = EdgeFileReader(path)
    edges = list(reader)
    if reader.count != reader.m:
        raise ParseError(f"header declares {reader.m} edges but the file has {reader.count}")
    return WeightedGraph.from_edges(reader.n, edges)


def format_graph(g: WeightedGraph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{a} {b} {c!r}" for a, b, c in g.edges)
    return "\n".join(lines) + "\n"


def save_graph(g: WeightedGraph, path: Path) -> None:
    """Write a graph in canonical edge order."""
    Path(path).write_text(format_graph(g), encoding="utf-8")
