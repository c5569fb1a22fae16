"""Graph generators and fixture initial states for the two reference networks."""

from __future__ import annotations

import json
import math
from importlib import resources

import numpy as np

from .graph import WeightedDigraph, build_laplacian
from .prng import SplitMix64
from .spectral import left_null_vector

# Seed used for the 100-node grown tree of the spanning-tree example.
EXAMPLE2_GRAPH_SEED = 20120101
EXAMPLE1_STATE_SEED = 1
EXAMPLE2_STATE_SEED = 3


def gen_ring(n: int, weight: float = 1.0) -> WeightedDigraph:
    """Directed cycle with edges ``i -> i+1 (mod n)``."""
    if n < 2:
        raise ValueError("ring needs at least 2 vertices")
    if weight <= 0:
        raise ValueError("ring weight must be positive")
    return WeightedDigraph.from_edges(n, [(i, (i + 1) % n, weight) for i in range(n)])


def grown_tree_parents(base_ring: int, total: int, seed: int) -> list:
    """Parent of each added vertex ``base_ring, ..., total-1``.

    Vertex ``j`` attaches below ``SplitMix64(seed).below(j)``, i.e. a uniform
    draw over the vertices already present.
    """
    if not 2 <= base_ring <= total:
        raise ValueError("need total >= base_ring >= 2")
    rng = SplitMix64(seed)
    return [rng.below(j) for j in range(base_ring, total)]


def gen_grown_tree(base_ring: int, total: int, seed: int) -> WeightedDigraph:
    """Unit-weight ring of ``base_ring`` vertices grown to ``total`` by random leaf attachment."""
    parents = grown_tree_parents(base_ring, total, seed)
    edges = [(i, (i + 1) % base_ring, 1.0) for i in range(base_ring)]
    edges += [(parent, j, 1.0) for j, parent in enumerate(parents, start=base_ring)]
    return WeightedDigraph.from_edges(total, edges)


def matched_initial_state(xi, xbar: float, dispersion: float, seed: int) -> np.ndarray:
    """Random state whose weighted mean and weighted dispersion hit the targets exactly.

    Draws uniform ``[-1, 1)`` values with SplitMix64, then applies one affine
    map ``x = xbar + c * (z - xi @ z)`` with ``c`` chosen so that
    ``sum(xi * (x - xbar)**2) == dispersion``.
    """
    xi = np.asarray(xi, dtype=float)
    rng = SplitMix64(seed)
    z = np.array([rng.uniform(-1.0, 1.0) for _ in range(len(xi))])
    z -= xi @ z
    spread = xi @ z**2
    if spread == 0:
        raise ValueError("degenerate draw: zero weighted spread")
    return xbar + math.sqrt(dispersion / spread) * z


def _load_fixture(name: str) -> np.ndarray:
    text = resources.files("impulsive_pinning").joinpath("data").joinpath(name).read_text()
    return np.array(json.loads(text)["x0"], dtype=float)


def example1_initial_state() -> np.ndarray:
    """Stored 100-vertex ring state with weighted mean 0.4886 and dispersion 0.5935."""
    return _load_fixture("example1_x0.json")


def example2_initial_state() -> np.ndarray:
    """Stored 100-vertex grown-tree state with root mean 0.3909 and dispersion 0.6369."""
    return _load_fixture("example2_x0.json")


def regenerate_fixture(name: str) -> dict:
    """Rebuild a stored initial-state document from its seed and target aggregates."""
    if name == "example1":
        graph, xbar, disp, seed = gen_ring(100), 0.4886, 0.5935, EXAMPLE1_STATE_SEED
    elif name == "example2":
        graph = gen_grown_tree(10, 100, EXAMPLE2_GRAPH_SEED)
        xbar, disp, seed = 0.3909, 0.6369, EXAMPLE2_STATE_SEED
    else:
        raise ValueError(f"unknown fixture {name!r}")
    xi = left_null_vector(build_laplacian(graph))
    x0 = matched_initial_state(xi, xbar, disp, seed)
    return {"seed": seed, "xbar": xbar, "V": disp, "x0": x0.tolist()}
