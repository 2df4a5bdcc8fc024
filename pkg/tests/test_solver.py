"""Tests for the recursive balanced-cut solver."""

import numpy as np
import pytest

from hcstream.errors import InvalidArgumentError, SolverError
from hcstream.graph import WeightedGraph, cut_weight
from hcstream.instances import clique, gen_random, path_vertices
from hcstream.oracle import brute_force_opt, exact_balanced_min_cut
from hcstream.solver import (
    CostReport,
    CutFinder,
    FinderKind,
    RunMetrics,
    lower_bound_balanced,
    recursive_balanced_hc,
    refine_swaps,
    solve,
    spectral_refine_cut,
)
from hcstream.tree import HCTree, balanced_side_limit, cost_lca, is_beta_balanced

EXACT = CutFinder(kind=FinderKind.EXACT)


class TestFinderKind:
    """Tests for finder name parsing."""

    @pytest.mark.parametrize(
        "name, kind",
        [
            ("exact", FinderKind.EXACT),
            ("spectral", FinderKind.SPECTRAL),
            ("spectral_refine", FinderKind.SPECTRAL),
            ("random_restart", FinderKind.RANDOM),
        ],
    )
    def test_parse(self, name: str, kind: FinderKind):
        """Test canonical names and aliases."""
        assert FinderKind.parse(name) is kind

    def test_unknown(self):
        """Test that unknown names list the choices."""
        with pytest.raises(InvalidArgumentError, match="exact, spectral, random"):
            FinderKind.parse("greedy")

    def test_exact_cap(self):
        """Test that the exact finder refuses subgraphs above its cap."""
        finder = CutFinder(kind=FinderKind.EXACT, exact_cap=5)

        with pytest.raises(SolverError) as exc_info:
            finder.find(path_vertices(6), 1 / 3)

        assert exc_info.value.size == 6

    def test_single_vertex(self):
        """Test that a one-vertex graph cannot be split."""
        with pytest.raises(SolverError):
            EXACT.find(WeightedGraph.from_edges(1, []), 1 / 3)


class TestSolve:
    """Tests for the offline pipeline."""

    def test_k4(self, k4: WeightedGraph):
        """Test that K4 clusters at cost 20 with a 2-2 root split."""
        report = solve(k4, finder=EXACT)

        assert report.cost == 20.0
        assert report.tree.depth == 2

    def test_two_triangles(self, two_triangles: WeightedGraph):
        """Test that components are separated first."""
        report = solve(two_triangles, finder=EXACT)
        left, right = report.tree.children[report.tree.root]

        assert report.cost == 16.0
        assert {frozenset(report.tree.leaves(left).tolist()), frozenset(report.tree.leaves(right).tolist())} == {
            frozenset({0, 1, 2}),
            frozenset({3, 4, 5}),
        }

    def test_path3(self, path3: WeightedGraph):
        """Test that the 3-vertex path reaches its optimum 5."""
        assert solve(path3, finder=EXACT).cost == 5.0

    def test_single_vertex(self):
        """Test that a lone vertex is its own tree."""
        report = solve(WeightedGraph.from_edges(1, []))

        assert report.cost == 0.0
        assert str(report.tree) == "0"
        assert report.metrics.cut_calls == 0

    def test_barbell_root_split(self, barbell: WeightedGraph):
        """Test that the spectral finder separates the two cliques of a barbell."""
        tree = recursive_balanced_hc(barbell, finder=CutFinder(kind=FinderKind.SPECTRAL, seed=0))
        left, _ = tree.children[tree.root]

        assert frozenset(tree.leaves(left).tolist()) in {frozenset(range(8)), frozenset(range(8, 16))}

    @pytest.mark.parametrize("kind", [FinderKind.SPECTRAL, FinderKind.RANDOM])
    def test_heuristic_trees_are_balanced(self, kind: FinderKind):
        """Test that heuristic trees are 1/3-balanced and never beat the optimum."""
        g = gen_random(11, 0.5, seed=3)
        report = solve(g, finder=CutFinder(kind=kind, seed=1))

        assert is_beta_balanced(report.tree, 1 / 3)
        assert report.cost >= brute_force_opt(g).value
        assert report.cost == cost_lca(g, report.tree)

    def test_seeded(self):
        """Test that the same seed gives the same tree."""
        g = gen_random(30, 0.3, seed=5)
        finder = CutFinder(kind=FinderKind.RANDOM, seed=9)

        assert str(solve(g, finder=finder).tree) == str(solve(g, finder=finder).tree)

    def test_beta_range(self, k4: WeightedGraph):
        """Test that beta above 1/2 is rejected."""
        with pytest.raises(InvalidArgumentError):
            solve(k4, beta=0.6)

    def test_exact_cap_propagates(self):
        """Test that a capped exact finder fails the whole run."""
        with pytest.raises(SolverError):
            solve(path_vertices(8), finder=CutFinder(kind=FinderKind.EXACT, exact_cap=5))

    def test_metrics(self, k4: WeightedGraph):
        """Test offline metrics: one pass holding every edge."""
        report = solve(k4, finder=EXACT)

        assert report.metrics.passes == 1
        assert report.metrics.words_peak == 18
        assert report.metrics.cut_calls == 3
        assert report.lower_bound_certified

    @pytest.mark.parametrize("kind", [FinderKind.EXACT, FinderKind.SPECTRAL, FinderKind.RANDOM])
    def test_unit_weight_cost_at_most_m_times_n(self, kind: FinderKind):
        """Test that every finder's tree on a unit-weight graph costs at most m·n."""
        for seed in range(5):
            g = gen_random(12, 0.4, seed=seed)
            report = solve(g, finder=CutFinder(kind=kind, seed=seed))

            assert report.cost <= g.m * g.n

    def test_half_balance_with_odd_sizes(self):
        """Test that β = 1/2 trees on odd sizes still pass the balance check."""
        g = path_vertices(7)
        report = solve(g, beta=0.5, finder=EXACT)

        assert is_beta_balanced(report.tree, 0.5)


class TestLowerBound:
    """Tests for lower_bound_balanced."""

    def test_k6(self):
        """Test (6/3) times the 1/3-balanced min cut of K6 (2·4 = 8)."""
        assert lower_bound_balanced(clique(6)) == 16.0

    def test_small_graphs(self):
        """Test that graphs below 3 vertices bound at 0."""
        assert lower_bound_balanced(clique(2)) == 0.0

    def test_below_optimum(self):
        """Test that the bound never exceeds the optimum."""
        rng = np.random.default_rng(2)
        for _ in range(10):
            g = gen_random(int(rng.integers(3, 10)), 0.5, seed=int(rng.integers(1000)))
            assert lower_bound_balanced(g) <= brute_force_opt(g).value + 1e-9


class TestCostReport:
    """Tests for CostReport."""

    def test_ratio_undefined_without_bound(self, two_triangles: WeightedGraph):
        """Test that a zero lower bound leaves the ratio undefined."""
        report = solve(two_triangles, finder=EXACT)

        assert report.lower_bound == 0.0
        assert report.ratio_certificate is None
        assert report.to_dict()["ratio_certificate"] is None

    def test_ratio(self):
        """Test cost over lower bound."""
        report = CostReport(cost=30.0, lower_bound=10.0, tree=HCTree.from_nested((0, 1)), lower_bound_certified=True)

        assert report.ratio_certificate == 3.0

    def test_to_dict_timing(self):
        """Test that wall time is only serialised when asked for."""
        report = CostReport(
            cost=20.0,
            lower_bound=16.0,
            tree=HCTree.from_nested(((0, 1), (2, 3))),
            lower_bound_certified=True,
            metrics=RunMetrics(words_peak=18, passes=1, cut_calls=3, wall_time=0.25),
        )

        assert report.to_dict(include_timing=False)["metrics"] == {"words_peak": 18, "passes": 1, "cut_calls": 3}
        assert report.to_dict()["metrics"]["wall_time"] == 0.25
        assert report.to_dict()["tree"] == "((0,1),(2,3))"
        assert report.to_dict()["depth"] == 2


class TestRefineSwaps:
    """Tests for refine_swaps."""

    def test_preserves_sizes_and_never_worsens(self):
        """Test that swaps keep side sizes and do not increase the cut."""
        rng = np.random.default_rng(4)
        for trial in range(10):
            g = gen_random(20, 0.3, seed=trial)
            in_a = np.zeros(20, dtype=bool)
            in_a[rng.permutation(20)[:10]] = True
            refined = refine_swaps(g, in_a, passes=4)

            before = cut_weight(g, set(np.flatnonzero(in_a).tolist()), set(np.flatnonzero(~in_a).tolist()))
            after = cut_weight(g, set(np.flatnonzero(refined).tolist()), set(np.flatnonzero(~refined).tolist()))
            assert refined.sum() == 10
            assert after <= before + 1e-9

    def test_recovers_barbell_split(self, barbell: WeightedGraph):
        """Test that refinement swaps 7 and 8 back to the bridge cut."""
        in_a = np.zeros(16, dtype=bool)
        in_a[[0, 1, 2, 3, 4, 5, 6, 8]] = True
        refined = refine_swaps(barbell, in_a, passes=4, seed=3)

        side = set(np.flatnonzero(refined).tolist())
        assert side in ({*range(8)}, {*range(8, 16)})
        assert cut_weight(barbell, side, set(range(16)) - side) == 1.0

    def test_same_seed_same_result(self):
        """Test that refinement is deterministic for a fixed seed."""
        g = gen_random(18, 0.4, seed=2)
        in_a = np.zeros(18, dtype=bool)
        in_a[::2] = True
        first = refine_swaps(g, in_a, passes=3, seed=11)
        second = refine_swaps(g, in_a, passes=3, seed=11)
        assert np.array_equal(first, second)
        assert in_a.sum() == 9


class TestSpectralRefineCut:
    """Tests for the spectral cut finder against the exact one."""

    @pytest.mark.parametrize("beta", [1 / 3, 1 / 2])
    def test_never_beats_exact(self, beta: float):
        """Test that the heuristic cut is never lighter than the exact balanced minimum."""
        for seed in range(8):
            g = gen_random(12, 0.5, seed=seed)
            heuristic = spectral_refine_cut(g, beta, CutFinder(seed=seed), seed=seed)
            exact = exact_balanced_min_cut(g, range(g.n), beta)

            assert heuristic.weight >= exact.weight - 1e-9
            limit = balanced_side_limit(g.n, beta)
            assert max(len(heuristic.side_a), len(heuristic.side_b)) <= limit
