"""Graph families: classics, noisy cycle counting, one-vs-many expanders and clique gadgets.

Every generator is a pure function of its parameters and seed. Ground truth
(hidden partitions, case bits, planted pairs) is returned next to the graph
and never read by the solvers.
"""

from __future__ import annotations

import math
from collections.abc import Iterator
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, NamedTuple

import numpy as np

from hcstream.errors import InvalidArgumentError
from hcstream.graph import WeightedGraph, cut_weight, relabel
from hcstream.tree import HCTree, Nested, balanced_tree, enumerate_binary_trees, random_balanced_tree

Edge = tuple[int, int, float]


class Family(str, Enum):
    PATH = "path"
    CYCLE = "cycle"
    CLIQUE = "clique"
    DISJOINT_UNION = "disjoint_union"
    RANDOM = "random"
    NOC = "noc"
    OVME = "ovme"
    TWO_CLIQUE_GADGET = "two_clique_gadget"
    FOUR_CLIQUE_GADGET = "four_clique_gadget"
    INDEX_GADGET = "index_gadget"


# =============================================================================
# Classic families
# =============================================================================


def _path_edges(vertices: range | list[int], weight: float = 1.0) -> list[Edge]:
    vs = list(vertices)
    return [(vs[i], vs[i + 1], weight) for i in range(len(vs) - 1)]


def _cycle_edges(vertices: range | list[int], weight: float = 1.0) -> list[Edge]:
    vs = list(vertices)
    return [*_path_edges(vs, weight), (vs[-1], vs[0], weight)]


def _clique_edges(vertices: range | list[int], weight: float = 1.0) -> list[Edge]:
    vs = list(vertices)
    return [(vs[a], vs[b], weight) for a in range(len(vs)) for b in range(a + 1, len(vs))]


def path_vertices(size: int, weight: float = 1.0) -> WeightedGraph:
    """Path through ``size`` vertices."""
    if size < 1:
        raise InvalidArgumentError(f"A path needs at least 1 vertex, got {size}")
    return WeightedGraph.from_edges(size, _path_edges(range(size), weight))


def path_edges(size: int, weight: float = 1.0) -> WeightedGraph:
    """Path with ``size`` edges."""
    if size < 0:
        raise InvalidArgumentError(f"Edge count must be nonnegative, got {size}")
    return path_vertices(size + 1, weight)


def cycle(size: int, weight: float = 1.0) -> WeightedGraph:
    if size < 3:
        raise InvalidArgumentError(f"A cycle needs at least 3 vertices, got {size}")
    return WeightedGraph.from_edges(size, _cycle_edges(range(size), weight))


def clique(size: int, weight: float = 1.0) -> WeightedGraph:
    if size < 1:
        raise InvalidArgumentError(f"A clique needs at least 1 vertex, got {size}")
    return WeightedGraph.from_edges(size, _clique_edges(range(size), weight))


def disjoint_union(*graphs: WeightedGraph) -> WeightedGraph:
    """Place graphs side by side, shifting ids by the sizes of those before."""
    offsets = np.cumsum([0, *(g.n for g in graphs)])
    parts = [g for g in graphs if g.m]
    if not parts:
        return WeightedGraph.from_edges(int(offsets[-1]), [])
    shift = [int(offsets[i]) for i, g in enumerate(graphs) if g.m]
    return WeightedGraph.from_arrays(
        int(offsets[-1]),
        np.concatenate([g.u + s for g, s in zip(parts, shift)]),
        np.concatenate([g.v + s for g, s in zip(parts, shift)]),
        np.concatenate([g.w for g in parts]),
    )


def gen_classic(family: Family | str, size: int, weight: float = 1.0) -> WeightedGraph:
    builders = {Family.PATH: path_vertices, Family.CYCLE: cycle, Family.CLIQUE: clique}
    try:
        family = Family(family)
    except ValueError as e:
        raise InvalidArgumentError(f"Unknown family '{family}'") from e
    if family not in builders:
        raise InvalidArgumentError(f"'{family.value}' is not a classic family")
    if weight <= 0 or not math.isfinite(weight):
        raise InvalidArgumentError(f"Weight must be positive, got {weight}")
    return builders[family](size, weight)


def gen_random(n: int, p: float, seed: int = 0) -> WeightedGraph:
    """Unit-weight Erdős–Rényi graph G(n, p)."""
    if n < 1:
        raise InvalidArgumentError(f"n must be positive, got {n}")
    if not 0 <= p <= 1:
        raise InvalidArgumentError(f"Edge probability must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    rows, cols = np.triu_indices(n, 1)
    keep = rng.random(len(rows)) < p
    return WeightedGraph.from_arrays(n, rows[keep], cols[keep], np.ones(int(keep.sum())))


def permute_vertices(g: WeightedGraph, seed: int) -> WeightedGraph:
    return relabel(g, np.random.default_rng(seed).permutation(g.n))


# =============================================================================
# Noisy cycle counting
# =============================================================================


class NocInstance(NamedTuple):
    graph: WeightedGraph
    n_effective: int
    cycles: int
    cycle_length: int
    paths: int


def gen_noc(n: int, k: int, case: int) -> NocInstance:
    """Few long cycles (case 1) or many short ones (case 2), padded with k-vertex paths.

    n is rounded down to a multiple of 8k so every count is integral:

    - case 1: 2 cycles of n/8 vertices and 3n/4k paths
    - case 2: n/8k cycles of 2k vertices and 3n/4k paths
    """
    if case not in (1, 2):
        raise InvalidArgumentError(f"case must be 1 or 2, got {case}")
    if k < 2:
        raise InvalidArgumentError(f"k must be at least 2, got {k}")
    step = math.lcm(8, 4 * k, 8 * k)
    effective = (n // step) * step
    if effective == 0 or k * k >= effective:
        raise InvalidArgumentError(f"k={k} must be below sqrt(n) for n={n} (rounded to {effective})")
    if effective // 8 < 3:
        raise InvalidArgumentError(f"n={effective} is too small for two cycles")

    if case == 1:
        cycles, length = 2, effective // 8
    else:
        cycles, length = effective // (8 * k), 2 * k
    paths = 3 * effective // (4 * k)

    edges: list[Edge] = []
    start = 0
    for _ in range(cycles):
        edges.extend(_cycle_edges(range(start, start + length)))
        start += length
    for _ in range(paths):
        edges.extend(_path_edges(range(start, start + k)))
        start += k
    return NocInstance(WeightedGraph.from_edges(effective, edges), effective, cycles, length, paths)


# =============================================================================
# One-vs-many expanders
# =============================================================================


def _matching(vertices: np.ndarray, pairs: int, rng: np.random.Generator) -> np.ndarray:
    shuffled = rng.permutation(vertices)[: 2 * pairs]
    return shuffled.reshape(pairs, 2)


def gen_ovme(n: int, k: int, t: int, case: str, seed: int = 0) -> tuple[WeightedGraph, np.ndarray]:
    """Union of k random matchings with n/4 edges each.

    In the "yes" case every matching is uniform on all vertices. In the "no"
    case a hidden partition into t equal classes is drawn and every matching
    places exactly n/4t edges inside each class. Returns the graph and the
    class label of every vertex.
    """
    if case not in ("yes", "no"):
        raise InvalidArgumentError(f"case must be 'yes' or 'no', got {case!r}")
    if k < 1 or t < 1:
        raise InvalidArgumentError(f"k and t must be positive, got k={k}, t={t}")
    if n < 4 * t or n % (4 * t):
        raise InvalidArgumentError(f"n={n} must be a positive multiple of 4t={4 * t}")

    rng = np.random.default_rng(seed)
    labels = np.empty(n, dtype=np.int64)
    labels[rng.permutation(n)] = np.repeat(np.arange(t), n // t)
    classes = [np.flatnonzero(labels == c) for c in range(t)]

    blocks = []
    for _ in range(k):
        if case == "yes":
            blocks.append(_matching(np.arange(n), n // 4, rng))
        else:
            blocks.extend(_matching(members, n // (4 * t), rng) for members in classes)
    pairs = np.concatenate(blocks)
    g = WeightedGraph.from_arrays(n, pairs[:, 0], pairs[:, 1], np.ones(len(pairs)))
    return g, labels


# =============================================================================
# Clique gadgets
# =============================================================================


def gen_two_clique_gadget(
    s: int, cross_edges: int, seed: int = 0
) -> tuple[WeightedGraph, tuple[frozenset[int], frozenset[int]]]:
    """Two s-cliques joined by uniformly random cross edges."""
    if s < 1:
        raise InvalidArgumentError(f"s must be positive, got {s}")
    if cross_edges < 0 or 2 * cross_edges > s * s:
        raise InvalidArgumentError(f"cross_edges must lie in [0, s^2/2] = [0, {s * s / 2:g}], got {cross_edges}")
    rng = np.random.default_rng(seed)
    picks = rng.choice(s * s, size=cross_edges, replace=False)
    edges = _clique_edges(range(s)) + _clique_edges(range(s, 2 * s))
    edges.extend((int(p // s), s + int(p % s), 1.0) for p in picks)
    hidden = (frozenset(range(s)), frozenset(range(s, 2 * s)))
    return WeightedGraph.from_edges(2 * s, edges), hidden


class IndexGadget(NamedTuple):
    graph: WeightedGraph
    tree: HCTree
    closed_form_costs: tuple[float, float]
    parts: tuple[list[int], list[int], list[int], list[int]]
    pair: tuple[int, int]


def gen_index_gadget(
    N: int, x: np.ndarray | None = None, i: int = 0, j: int = 0, seed: int = 0
) -> IndexGadget:
    """Four 4N-cliques encoding a bipartite graph and a queried pair.

    Vertices 0..N-1 form L and N..2N-1 form R; bit x[a, b] puts the edge
    (a, N+b). The queried pair is u = i, v = N+j. Each endpoint gets its own
    clique, L-u and R-v are topped up to 4N vertices, and the cliques are
    returned in the order the prescribed tree splits them.

    ``closed_form_costs`` is (cost if (u, v) is an edge, cost if it is not).
    """
    if N < 1:
        raise InvalidArgumentError(f"N must be positive, got {N}")
    rng = np.random.default_rng(seed)
    try:
        bits = rng.integers(0, 2, size=(N, N)) if x is None else np.asarray(x)
    except ValueError as e:
        raise InvalidArgumentError(f"x is not a bit matrix: {e}") from e
    if bits.shape != (N, N):
        raise InvalidArgumentError(f"x must be {N}x{N}, got shape {bits.shape}")
    if not np.isin(bits, (0, 1)).all():
        raise InvalidArgumentError("x entries must be 0 or 1")
    bits = bits.astype(np.int64)
    if not (0 <= i < N and 0 <= j < N):
        raise InvalidArgumentError(f"(i, j) = ({i}, {j}) is outside [0, {N})^2")

    u, v = i, N + j
    s = 4 * N
    extras = iter(range(2 * N, 16 * N))
    clique_u = [u, *(next(extras) for _ in range(s - 1))]
    clique_v = [v, *(next(extras) for _ in range(s - 1))]
    left = [a for a in range(N) if a != u] + [next(extras) for _ in range(3 * N + 1)]
    right = [N + b for b in range(N) if N + b != v] + [next(extras) for _ in range(3 * N + 1)]

    rows, cols = np.nonzero(bits)
    edges: list[Edge] = [(int(a), N + int(b), 1.0) for a, b in zip(rows, cols)]
    for members in (clique_u, clique_v, left, right):
        edges.extend(_clique_edges(members))
    g = WeightedGraph.from_edges(16 * N, edges)

    deg_u = int(bits[i].sum())
    deg_v = int(bits[:, j].sum())
    if deg_u <= deg_v:
        parts = (clique_u, clique_v, left, right)
        d_first, d_second = deg_u, deg_v
    else:
        parts = (clique_v, clique_u, right, left)
        d_first, d_second = deg_v, deg_u
    interior = int(bits.sum()) - deg_u - deg_v + int(bits[i, j])
    constant = 4 * (s**3 - s) / 3
    tail = 8 * N * interior + constant
    present = d_first * 16 * N + (d_second - 1) * 12 * N + tail
    absent = d_first * 16 * N + d_second * 12 * N + tail

    blocks = [balanced_tree(p) for p in parts]
    tree = HCTree.from_nested((blocks[0], (blocks[1], (blocks[2], blocks[3]))))
    return IndexGadget(g, tree, (float(present), float(absent)), parts, (u, v))


def gen_four_clique_gadget(N: int, seed: int = 0) -> IndexGadget:
    """Index gadget with random bits and a random queried pair."""
    if N < 1:
        raise InvalidArgumentError(f"N must be positive, got {N}")
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=(N, N))
    i, j = (int(c) for c in rng.integers(0, N, size=2))
    return gen_index_gadget(N, bits, i, j, seed)


def gen_four_clique_conditions_check(g: WeightedGraph, parts: tuple[list[int], ...] | list[list[int]]) -> bool:
    """Whether four equal cliques chained S1-S2-S3-S4-S1 meet the sparse-split conditions.

    a) |E(S1,S2)| <= 1 and 1 <= |E(S1,S4)| <= |E(S2,S3)| <= 3s/8
    b) only one vertex of S1 (and of S2) has neighbours outside its clique
    c) s^2/64 <= |E(S3,S4)| <= 3s^2/64
    """
    if len(parts) != 4:
        raise InvalidArgumentError(f"Expected 4 parts, got {len(parts)}")
    sizes = {len(p) for p in parts}
    if len(sizes) != 1:
        raise InvalidArgumentError(f"Parts must have equal sizes, got {[len(p) for p in parts]}")
    s = sizes.pop()
    sets = [frozenset(p) for p in parts]
    if sum(len(p) for p in sets) != g.n or len(frozenset().union(*sets)) != g.n:
        raise InvalidArgumentError("Parts must partition the vertex set")

    for members in sets:
        sub, _ = g.induced(members)
        if sub.m != s * (s - 1) // 2:
            return False
    if cut_weight(g, sets[0], sets[2]) or cut_weight(g, sets[1], sets[3]):
        return False

    e12 = cut_weight(g, sets[0], sets[1])
    e14 = cut_weight(g, sets[0], sets[3])
    e23 = cut_weight(g, sets[1], sets[2])
    e34 = cut_weight(g, sets[2], sets[3])
    cond_a = e12 <= 1 and 1 <= e14 <= e23 <= 3 * s / 8

    cond_b = True
    for members in sets[:2]:
        outward = {x for x in members if any(y not in members for y in g.neighbors(x))}
        cond_b = cond_b and len(outward) == 1

    cond_c = s * s / 64 <= e34 <= 3 * s * s / 64
    return bool(cond_a and cond_b and cond_c)


def sample_alternative_trees(gadget: IndexGadget, count: int, seed: int = 0) -> Iterator[HCTree]:
    """Competitor trees for the prescribed gadget tree.

    Alternates between random 1/3-balanced trees and trees whose root cut
    separates part of one clique from the rest of it.
    """
    rng = np.random.default_rng(seed)
    vertices = np.arange(gadget.graph.n)
    for index in range(count):
        if index % 2 == 0:
            yield HCTree.from_nested(random_balanced_tree(vertices, 1 / 3, rng))
            continue
        target = gadget.parts[int(rng.integers(0, 4))]
        split = rng.permutation(target)
        at = int(rng.integers(1, len(split)))
        inside = set(split[:at].tolist())
        others = vertices[[x not in inside for x in vertices.tolist()]]
        if rng.random() < 0.5:
            # the detached piece travels alone
            side_a, side_b = np.array(sorted(inside)), others
        else:
            extra = rng.permutation(np.setdiff1d(others, split[at:]))
            take = int(rng.integers(0, len(extra) + 1))
            side_a = np.concatenate([np.array(sorted(inside)), extra[:take]])
            side_b = np.setdiff1d(vertices, side_a)
        yield HCTree.from_nested(
            (random_balanced_tree(side_a, 1 / 3, rng), random_balanced_tree(side_b, 1 / 3, rng))
        )


def clique_block_reorders(gadget: IndexGadget) -> list[HCTree]:
    """Every tree that keeps the four cliques intact, over all block orders."""
    blocks = [balanced_tree(p) for p in gadget.parts]
    trees = []
    for shape in enumerate_binary_trees(range(4)):
        trees.append(HCTree.from_nested(_expand(shape, blocks)))
    return trees


def _expand(shape: Nested, blocks: list[Nested]) -> Nested:
    if isinstance(shape, int):
        return blocks[shape]
    return tuple(_expand(child, blocks) for child in shape)


# =============================================================================
# Specs
# =============================================================================


@dataclass
class InstanceSpec:
    """A generator call: family, family parameters and seed."""

    family: Family
    params: dict[str, Any] = field(default_factory=dict)
    seed: int = 0

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> InstanceSpec:
        body = dict(data)
        try:
            family = Family(body.pop("family"))
        except KeyError as e:
            raise InvalidArgumentError("Instance is missing 'family'") from e
        except ValueError as e:
            raise InvalidArgumentError(f"Unknown family '{data['family']}'") from e
        try:
            seed = int(body.pop("seed", 0))
        except (TypeError, ValueError) as e:
            raise InvalidArgumentError(f"Instance seed is not a valid int: {e}") from e
        return cls(family, body, seed)

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.family.value, "seed": self.seed, **self.params}


@dataclass
class Instance:
    spec: InstanceSpec
    graph: WeightedGraph
    hidden: dict[str, Any] = field(default_factory=dict)


def _param(spec: InstanceSpec, name: str, kind: type = int, default: Any = None) -> Any:
    if name not in spec.params:
        if default is not None:
            return default
        raise InvalidArgumentError(f"Family '{spec.family.value}' needs parameter '{name}'")
    try:
        return kind(spec.params[name])
    except (TypeError, ValueError) as e:
        raise InvalidArgumentError(f"Parameter '{name}' is not a valid {kind.__name__}") from e


def generate(spec: InstanceSpec) -> Instance:
    """Dispatch a spec to its generator."""
    family = spec.family
    if family in (Family.PATH, Family.CYCLE, Family.CLIQUE):
        weight = _param(spec, "weight", float, 1.0)
        return Instance(spec, gen_classic(family, _param(spec, "size"), weight))
    if family is Family.DISJOINT_UNION:
        parts = spec.params.get("parts") or []
        try:
            graphs = [
                gen_classic(p["family"], int(p["size"]), float(p.get("weight", 1.0))) for p in parts
            ]
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidArgumentError(f"Union parts need 'family' and 'size': {e}") from e
        return Instance(spec, disjoint_union(*graphs))
    if family is Family.RANDOM:
        return Instance(spec, gen_random(_param(spec, "n"), _param(spec, "p", float), spec.seed))
    if family is Family.NOC:
        case = _param(spec, "case")
        noc = gen_noc(_param(spec, "n"), _param(spec, "k"), case)
        hidden = {"case": case, "n": noc.n_effective, "cycles": noc.cycles, "cycle_length": noc.cycle_length}
        return Instance(spec, noc.graph, hidden)
    if family is Family.OVME:
        case = _param(spec, "case", str)
        g, labels = gen_ovme(_param(spec, "n"), _param(spec, "k"), _param(spec, "t"), case, spec.seed)
        return Instance(spec, g, {"case": case, "labels": labels.tolist()})
    if family is Family.TWO_CLIQUE_GADGET:
        g, (side_a, side_b) = gen_two_clique_gadget(_param(spec, "s"), _param(spec, "cross"), spec.seed)
        return Instance(spec, g, {"bipartition": [sorted(side_a), sorted(side_b)]})
    if family is Family.FOUR_CLIQUE_GADGET:
        gadget = gen_four_clique_gadget(_param(spec, "N"), spec.seed)
    else:
        gadget = gen_index_gadget(
            _param(spec, "N"),
            spec.params.get("x"),
            _param(spec, "i", int, 0),
            _param(spec, "j", int, 0),
            spec.seed,
        )
    hidden = {
        "parts": [list(p) for p in gadget.parts],
        "pair": list(gadget.pair),
        "tree": str(gadget.tree),
        "cost_if_present": gadget.closed_form_costs[0],
        "cost_if_absent": gadget.closed_form_costs[1],
    }
    return Instance(spec, gadget.graph, hidden)
