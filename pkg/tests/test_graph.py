import numpy as np
import pytest

from impulsive_pinning.errors import GraphError, NoRootError
from impulsive_pinning.generators import gen_grown_tree, gen_ring
from impulsive_pinning.graph import (Connectivity, WeightedDigraph, build_laplacian,
                                     graph_from_dict, is_block_lower_triangular, load_graph,
                                     reorder_block_form, save_graph, scc_decompose)

from oracles import classify_bruteforce, random_digraph, reachability


def test_three_cycle_laplacian():
    g = WeightedDigraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)])
    lap = build_laplacian(g)
    np.testing.assert_array_equal(lap.entries, [[1, 0, -1], [-1, 1, 0], [0, -1, 1]])
    assert lap.classification is Connectivity.STRONGLY_CONNECTED


def test_zero_weights_classify_no_root():
    lap = build_laplacian(WeightedDigraph(np.zeros((2, 2))))
    np.testing.assert_array_equal(lap.entries, np.zeros((2, 2)))
    assert lap.classification is Connectivity.NO_ROOT


def test_ten_ring_block():
    expected = np.eye(10) - np.roll(np.eye(10), 1, axis=0)
    assert expected[0, 9] == -1 and expected[1, 0] == -1
    np.testing.assert_array_equal(build_laplacian(gen_ring(10)).entries, expected)


def test_single_vertex_is_strongly_connected():
    lap = build_laplacian(WeightedDigraph(np.zeros((1, 1))))
    assert lap.classification is Connectivity.STRONGLY_CONNECTED
    np.testing.assert_array_equal(lap.entries, [[0.0]])


def test_diagonal_is_dropped_with_flag():
    with pytest.warns(UserWarning):
        g = WeightedDigraph(np.array([[5.0, 1.0], [1.0, 2.0]]))
    assert g.diagonal_dropped
    np.testing.assert_array_equal(np.diag(g.weights), [0, 0])


@pytest.mark.parametrize("edges", [[(0, 0, 1.0)], [(0, 1, -1.0)], [(0, 5, 1.0)]])
def test_bad_edges_rejected(edges):
    with pytest.raises(GraphError):
        WeightedDigraph.from_edges(2, edges)


def test_negative_dense_weight_rejected():
    with pytest.raises(GraphError):
        WeightedDigraph(np.array([[0.0, -1.0], [1.0, 0.0]]))


def test_ring_is_one_component():
    scc = scc_decompose(gen_ring(5))
    assert scc.components == ((0, 1, 2, 3, 4),)


def test_two_disjoint_rings():
    g = WeightedDigraph.from_edges(6, [(0, 1, 1), (1, 2, 1), (2, 0, 1), (3, 4, 1), (4, 5, 1), (5, 3, 1)])
    scc = scc_decompose(g)
    assert scc.components == ((0, 1, 2), (3, 4, 5))
    assert scc.source_components == (0, 1)
    assert build_laplacian(g).classification is Connectivity.NO_ROOT
    with pytest.raises(NoRootError):
        reorder_block_form(build_laplacian(g))


def test_grown_tree_components():
    g = gen_grown_tree(10, 100, seed=5)
    scc = scc_decompose(g)
    assert scc.components[0] == tuple(range(10))
    assert all(len(c) == 1 for c in scc.components[1:])
    # reachability oracle: the ring reaches everything, nothing else reaches the ring
    reach = reachability(g.weights)
    assert reach[:10].all()
    assert not reach[10:, :10].any()


def test_leaf_first_listing_is_reordered():
    # vertex 0 is a leaf hanging off the 3-cycle {1, 2, 3}
    g = WeightedDigraph.from_edges(4, [(1, 2, 1), (2, 3, 1), (3, 1, 1), (2, 0, 1)])
    lap = build_laplacian(g)
    assert lap.classification is Connectivity.SPANNING_TREE
    block = reorder_block_form(lap)
    assert block.labels.tolist() == [1, 2, 3, 0]
    assert block.block_sizes == (3, 1)
    p = np.eye(4)[lap.permutation]
    np.testing.assert_array_equal(block.entries, p @ lap.entries @ p.T)
    assert is_block_lower_triangular(block.entries, block.block_sizes)


def test_strongly_connected_reorder_is_identity():
    lap = build_laplacian(gen_ring(7))
    out = reorder_block_form(lap)
    assert out.permutation.tolist() == list(range(7))
    assert out.block_sizes == (7,)
    np.testing.assert_array_equal(out.entries, lap.entries)


def test_grown_tree_block_sizes():
    lap = reorder_block_form(build_laplacian(gen_grown_tree(10, 100, seed=11)))
    assert lap.block_sizes == (10,) + (1,) * 90
    assert is_block_lower_triangular(lap.entries, lap.block_sizes)


def test_random_classification_matches_bruteforce():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        n = int(rng.integers(1, 13))
        w = random_digraph(rng, n, rng.uniform(0.05, 0.5))
        lap = build_laplacian(WeightedDigraph(w))
        assert lap.classification.value == classify_bruteforce(w)


def test_laplacian_invariants_on_random_graphs():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = int(rng.integers(2, 13))
        w = random_digraph(rng, n, 0.4)
        lap = build_laplacian(WeightedDigraph(w))
        e = lap.entries
        tol = 1e-12 * n * np.abs(e).max(initial=1.0)
        assert np.abs(e.sum(axis=1)).max() <= tol
        off = e - np.diag(np.diag(e))
        assert (off <= 0).all() and (np.diag(e) >= 0).all()
        if lap.classification is not Connectivity.NO_ROOT:
            block = reorder_block_form(lap)
            assert is_block_lower_triangular(block.entries, block.block_sizes)
            # idempotent: re-classifying the ordered graph gives the identity order
            again = build_laplacian(WeightedDigraph(-block.entries + np.diag(np.diag(block.entries))))
            assert again.permutation.tolist() == list(range(n))


def test_graph_file_round_trip(tmp_path):
    g = gen_grown_tree(4, 9, seed=3)
    path = tmp_path / "g.json"
    save_graph(g, path)
    np.testing.assert_array_equal(load_graph(path).weights, g.weights)


def test_edges_semantics_from_to():
    g = graph_from_dict({"n": 2, "edges": [{"from": 0, "to": 1, "weight": 2.5}]})
    assert g.weights[1, 0] == 2.5 and g.weights[0, 1] == 0


def test_dense_weights_document():
    g = graph_from_dict({"n": 2, "weights": [[0, 1], [3, 0]]})
    np.testing.assert_array_equal(g.weights, [[0, 1], [3, 0]])
    with pytest.raises(GraphError):
        graph_from_dict({"n": 3, "weights": [[0, 1], [3, 0]]})
