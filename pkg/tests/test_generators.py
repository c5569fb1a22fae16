import json
from importlib import resources

import numpy as np
import pytest

from impulsive_pinning.generators import (EXAMPLE2_GRAPH_SEED, example1_initial_state,
                                          example2_initial_state, gen_grown_tree, gen_ring,
                                          grown_tree_parents, matched_initial_state,
                                          regenerate_fixture)
from impulsive_pinning.graph import Connectivity, build_laplacian, reorder_block_form
from impulsive_pinning.observables import lyapunov_V, weighted_mean
from impulsive_pinning.prng import SplitMix64
from impulsive_pinning.spectral import left_null_vector

from oracles import reachability


def test_splitmix64_reference_vector():
    rng = SplitMix64(1234567)
    assert [rng.next_u64() for _ in range(3)] == [
        6457827717110365317, 3203168211198807973, 9817491932198370423]


def test_splitmix64_bounded_and_uniform():
    rng = SplitMix64(0)
    draws = [rng.below(7) for _ in range(2000)]
    assert min(draws) == 0 and max(draws) == 6
    u = [SplitMix64(5).uniform(-1, 1) for _ in range(3)]
    assert u[0] == u[1] == u[2] and -1 <= u[0] < 1
    with pytest.raises(ValueError):
        rng.below(0)


def test_ring_generator():
    np.testing.assert_array_equal(build_laplacian(gen_ring(2)).entries, [[1, -1], [-1, 1]])
    assert gen_ring(4, 2.5).weights[1, 0] == 2.5
    with pytest.raises(ValueError):
        gen_ring(1)


def test_small_grown_tree_draws():
    assert grown_tree_parents(3, 5, 42) == [2, 0]
    lap = reorder_block_form(build_laplacian(gen_grown_tree(3, 5, 42)))
    assert lap.n == 5 and lap.block_sizes == (3, 1, 1)


def test_zero_growth_is_the_ring():
    np.testing.assert_array_equal(gen_grown_tree(10, 10, 123).weights, gen_ring(10).weights)


def test_grown_tree_fidelity_over_seeds():
    for seed in range(100):
        g = gen_grown_tree(10, 100, seed)
        lap = build_laplacian(g)
        assert lap.classification is Connectivity.SPANNING_TREE
        assert sorted(lap.root_block.tolist()) == list(range(10))
        reach = reachability(g.weights)
        roots = np.nonzero(reach.all(axis=1))[0]
        assert roots.tolist() == list(range(10))


def test_matched_state_hits_targets():
    xi = np.random.default_rng(0).dirichlet(np.ones(12))
    x = matched_initial_state(xi, -0.25, 1.75, seed=99)
    assert weighted_mean(x, xi) == pytest.approx(-0.25, abs=1e-14)
    assert lyapunov_V(x, xi) == pytest.approx(1.75, rel=1e-13)
    np.testing.assert_array_equal(x, matched_initial_state(xi, -0.25, 1.75, seed=99))


@pytest.mark.parametrize("name", ["example1", "example2"])
def test_fixture_matches_regeneration(name):
    stored = json.loads(resources.files("impulsive_pinning").joinpath("data")
                        .joinpath(f"{name}_x0.json").read_text())
    assert stored == json.loads(json.dumps(regenerate_fixture(name)))


def test_fixture_aggregates():
    x1 = example1_initial_state()
    xi1 = np.full(100, 0.01)
    assert weighted_mean(x1, xi1) == pytest.approx(0.4886, abs=1e-12)
    assert lyapunov_V(x1, xi1) == pytest.approx(0.5935, abs=1e-12)
    xi2 = left_null_vector(build_laplacian(gen_grown_tree(10, 100, EXAMPLE2_GRAPH_SEED)))
    x2 = example2_initial_state()
    assert weighted_mean(x2, xi2) == pytest.approx(0.3909, abs=1e-12)
    assert lyapunov_V(x2, xi2) == pytest.approx(0.6369, abs=1e-12)
