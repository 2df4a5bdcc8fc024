"""Tests for the exact oracles."""

import networkx as nx
import numpy as np
import pytest

from hcstream.errors import InvalidArgumentError, SizeLimitError
from hcstream.graph import WeightedGraph
from hcstream.instances import clique, disjoint_union, gen_two_clique_gadget, path_vertices
from hcstream.oracle import (
    all_trees_opt,
    brute_force_opt,
    exact_balanced_min_cut,
    verify_first_split,
)
from hcstream.tree import cost_lca


def _random_graph(rng: np.random.Generator, n: int) -> WeightedGraph:
    edges = [
        (a, b, float(rng.integers(1, 5))) for a in range(n) for b in range(a + 1, n) if rng.random() < 0.5
    ]
    return WeightedGraph.from_edges(n, edges)


class TestBruteForceOpt:
    """Tests for the subset DP optimum."""

    @pytest.mark.parametrize("s", range(2, 8))
    def test_clique_closed_form(self, s: int):
        """Test that opt(K_s) = (s^3 - s)/3."""
        assert brute_force_opt(clique(s)).value == (s**3 - s) / 3

    def test_path3(self, path3: WeightedGraph):
        """Test that the 3-vertex path has optimum 5."""
        result = brute_force_opt(path3)

        assert result.value == 5.0
        assert cost_lca(path3, result.tree) == 5.0

    def test_two_triangles(self, two_triangles: WeightedGraph):
        """Test that disjoint components are optimised separately (8 + 8)."""
        result = brute_force_opt(two_triangles)

        assert result.value == 16.0
        assert (frozenset({0, 1, 2}), frozenset({3, 4, 5})) in result.optimal_root_cuts

    def test_single_vertex(self):
        """Test the one-vertex graph."""
        result = brute_force_opt(WeightedGraph.from_edges(1, []))

        assert result.value == 0.0
        assert str(result.tree) == "0"

    def test_empty_graph_rejected(self):
        """Test that n = 0 has no optimum."""
        with pytest.raises(InvalidArgumentError):
            brute_force_opt(WeightedGraph.from_edges(0, []))

    def test_cap(self):
        """Test that the DP refuses graphs above its cap."""
        with pytest.raises(SizeLimitError, match="cap"):
            brute_force_opt(path_vertices(17))
        with pytest.raises(SizeLimitError):
            brute_force_opt(path_vertices(6), cap=5)

    def test_tree_realises_value(self):
        """Test that the returned tree achieves the returned value."""
        rng = np.random.default_rng(2)
        for n in range(2, 10):
            g = _random_graph(rng, n)
            result = brute_force_opt(g)
            assert cost_lca(g, result.tree) == result.value

    def test_matches_enumeration(self):
        """Test that the DP agrees with enumerating every binary tree."""
        rng = np.random.default_rng(4)
        for _ in range(20):
            g = _random_graph(rng, int(rng.integers(2, 7)))
            value, tree = all_trees_opt(g)
            assert brute_force_opt(g).value == value
            assert cost_lca(g, tree) == value

    def test_additivity_over_components(self):
        """Test that opt of a disjoint union is the sum of the parts."""
        rng = np.random.default_rng(6)
        for _ in range(10):
            a = _random_graph(rng, int(rng.integers(1, 5)))
            b = _random_graph(rng, int(rng.integers(1, 5)))
            assert brute_force_opt(disjoint_union(a, b)).value == brute_force_opt(a).value + brute_force_opt(b).value

    def test_to_dict(self, path3: WeightedGraph):
        """Test the serialised form."""
        data = brute_force_opt(path3).to_dict()

        assert data["value"] == 5.0
        assert data["tree"] in ("((0,1),2)", "(0,(1,2))")
        assert [[0, 1], [2]] in data["optimal_root_cuts"] or [[2], [0, 1]] in data["optimal_root_cuts"]


class TestAllTreesOpt:
    """Tests for the enumeration oracle."""

    def test_cap(self):
        """Test that enumeration is limited to small n."""
        with pytest.raises(SizeLimitError):
            all_trees_opt(path_vertices(9))


class TestVerifyFirstSplit:
    """Tests for verify_first_split."""

    def test_two_cliques_with_cross_edges(self):
        """Test that the clique bipartition is optimal with few cross edges."""
        g, hidden = gen_two_clique_gadget(4, 2, seed=0)

        assert verify_first_split(g, hidden)

    def test_path_end_split_not_optimal(self):
        """Test that peeling an endpoint off P4 is not an optimal root split."""
        g = path_vertices(4)

        assert not verify_first_split(g, ({0}, {1, 2, 3}))
        assert verify_first_split(g, ({2, 3}, {0, 1}))

    def test_every_clique_split_is_optimal(self, k4: WeightedGraph):
        """Test that all root splits of a clique tie."""
        assert verify_first_split(k4, ({0}, {1, 2, 3}))
        assert verify_first_split(k4, ({0, 1}, {2, 3}))

    def test_components_forced(self, two_triangles: WeightedGraph):
        """Test that the component split of disjoint triangles is optimal."""
        assert verify_first_split(two_triangles, ({0, 1, 2}, {3, 4, 5}))

    def test_not_a_bipartition(self, k4: WeightedGraph):
        """Test that sides must partition the vertex set."""
        with pytest.raises(InvalidArgumentError):
            verify_first_split(k4, ({0}, {1, 2}))


class TestExactBalancedMinCut:
    """Tests for exact_balanced_min_cut."""

    def test_path4(self):
        """Test that the 1/3-balanced min cut of P4 is the middle edge."""
        cut = exact_balanced_min_cut(path_vertices(4), range(4), 1 / 3)

        assert cut.weight == 1.0
        assert {cut.side_a, cut.side_b} == {frozenset({0, 1}), frozenset({2, 3})}

    def test_two_triangles_half(self, two_triangles: WeightedGraph):
        """Test that beta = 1/2 finds the zero-weight component split."""
        cut = exact_balanced_min_cut(two_triangles, range(6), 0.5)

        assert cut.weight == 0.0

    def test_subset_keeps_original_ids(self):
        """Test that the cut is reported in the graph's vertex ids."""
        g = path_vertices(6)
        cut = exact_balanced_min_cut(g, [2, 3, 4, 5], 1 / 3)

        assert cut.side_a | cut.side_b == frozenset({2, 3, 4, 5})
        assert cut.weight == 1.0

    def test_respects_balance(self):
        """Test that the larger side never exceeds the balance limit."""
        g = WeightedGraph.from_edges(6, [(0, a, 1.0) for a in range(1, 6)])
        cut = exact_balanced_min_cut(g, range(6), 1 / 3)

        assert cut.larger_side <= 4

    def test_against_networkx_stoer_wagner(self):
        """Test that beta close to 0 recovers the global minimum cut."""
        rng = np.random.default_rng(8)
        for _ in range(5):
            g = _random_graph(rng, 8)
            if len(g.components()) > 1:
                continue
            nxg = nx.Graph()
            nxg.add_weighted_edges_from(g.edges)
            value, _ = nx.stoer_wagner(nxg)
            assert exact_balanced_min_cut(g, range(8), 0.01).weight == value

    def test_beta_range(self, k4: WeightedGraph):
        """Test that beta above 1/2 is rejected."""
        with pytest.raises(InvalidArgumentError):
            exact_balanced_min_cut(k4, range(4), 0.6)

    def test_cap(self):
        """Test that large subsets are refused."""
        with pytest.raises(SizeLimitError):
            exact_balanced_min_cut(path_vertices(25), range(25), 1 / 3)
