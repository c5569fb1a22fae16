"""Acceptance criteria, one test each, at the stated tolerances and runtime bounds.

Run ``pytest tests/test_acceptance.py`` (or this file directly); the terminal
summary prints one PASS/FAIL line per criterion.
"""

import math
import time

import numpy as np
import pytest

from impulsive_pinning.controller import (Certificate, ConstantStrength, NO_ROOT, NOT_IN_ROOT,
                                          STRENGTH_OUT_OF_RANGE, PinPlan, min_gap_T,
                                          ratio_bound_C)
from impulsive_pinning.generators import EXAMPLE2_GRAPH_SEED, gen_grown_tree, gen_ring
from impulsive_pinning.graph import (Connectivity, WeightedDigraph, build_laplacian,
                                     reorder_block_form)
from impulsive_pinning.observables import weighted_mean
from impulsive_pinning.scenario import (example_scenario, resolve_initial_state, run_scenario,
                                        synthesize)
from impulsive_pinning.simulator import flow, run
from impulsive_pinning.spectral import gap_matrix, spectral_data
from impulsive_pinning.verify import PASS, verify_trajectory

from oracles import (classify_bruteforce, lambda2_charpoly, random_digraph,
                     random_strongly_connected, xi_cofactor)

HARD_CHECKS = ("flow_conservation", "lyapunov_decay", "jump_bounds", "ratio_bound",
               "geometric_decay")


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def test_criterion_1_ring_spectral():
    """Ring(100) spectral reproduction"""
    with Timer() as timer:
        spec = spectral_data(build_laplacian(gen_ring(100)))
    assert np.abs(spec.xi - 0.01).max() <= 1e-12
    oracle = 2 * 0.01 * (1 - math.cos(2 * math.pi / 100))
    assert abs(spec.lambda2 - oracle) <= 1e-8
    assert f"{spec.lambda2:.4e}" == "3.9465e-05"
    assert timer.elapsed < 1.0


def test_criterion_2_example1_certificate():
    """Ring certificate arithmetic (scenario example1)"""
    with Timer() as timer:
        c = ratio_bound_C(0.01, 11.0, 0.00999)
        t = min_gap_T(0.01, 3.9465e-5, 0.01, 0.00999, c, 2.4856, 1.0)
        # the same numbers through the full synthesis path
        sc = example_scenario("example1")
        lap, spec, cert = synthesize(sc.graph, sc.plan,
                                     resolve_initial_state(sc.initial_state, 100, np.full(100, 0.01)))
    assert abs(c - 15.7641) <= 5e-4
    assert abs(t - 1866.2) <= 0.5
    assert cert.valid and (cert.eta1, cert.eta2) == (11.0, 11.0)
    assert abs(cert.big_c - 15.7641) <= 5e-4
    assert abs(cert.min_gap_t - 1866.2) <= 0.5
    assert timer.elapsed < 1.0


def test_criterion_3_example1_end_to_end():
    """Ring end-to-end: var < 1e-3 within 60 impulses, all invariants (example1)"""
    with Timer() as timer:
        result = run_scenario(example_scenario("example1"))
    traj, report = result.trajectory, result.report
    assert abs(traj.xbar[0] - 0.4886) <= 1e-12 and abs(traj.V[0] - 0.5935) <= 1e-12
    assert result.certificate.decay_ratio == pytest.approx(0.99989, abs=1e-12)
    for name in HARD_CHECKS:
        check = report.check(name)
        assert check.status == PASS and check.worst_slack >= 0, check
    assert traj.status == "converged"
    assert timer.elapsed < 10.0
    # impulses after the initialising one at t = 0
    needed = len(traj.impulses) - (1 if traj.impulse_at_zero else 0)
    assert needed <= 60, f"var fell below 1e-3 only after {needed} impulses"


def test_criterion_4_example2_structure():
    """Grown-tree structure and lambda2 (example2)"""
    with Timer() as timer:
        lap = build_laplacian(gen_grown_tree(10, 100, EXAMPLE2_GRAPH_SEED))
        block = reorder_block_form(lap)
        spec = spectral_data(lap)
    assert lap.classification is Connectivity.SPANNING_TREE
    assert block.block_sizes == (10,) + (1,) * 90
    assert np.abs(spec.xi[:10] - 0.1).max() <= 1e-12 and not spec.xi[10:].any()
    assert abs(spec.lambda2 - 2 * 0.1 * (1 - math.cos(2 * math.pi / 10))) <= 1e-12
    assert abs(spec.lambda2 - 0.03820) <= 1e-6
    assert timer.elapsed < 1.0


def test_criterion_5_example2_end_to_end():
    """Grown-tree end-to-end with cascade (example2)"""
    with Timer() as timer:
        result = run_scenario(example_scenario("example2"))
    traj, report = result.trajectory, result.report
    root = result.spectral.xi > 0
    assert abs(weighted_mean(traj.x[0], result.spectral.xi) - 0.3909) <= 1e-12
    assert abs(traj.V[0] - 0.6369) <= 1e-12
    assert traj.status == "converged" and traj.var[-1] < 1e-3
    for name in HARD_CHECKS:
        assert report.check(name).status in (PASS, "not_established")
        assert report.check(name).status != "fail"
    assert report.check("cascade").status == PASS
    assert root.sum() == 10
    assert timer.elapsed < 10.0


def test_criterion_6_oracle_equivalence():
    """Oracle equivalence on small random instances"""
    rng = np.random.default_rng(20240601)
    with Timer() as timer:
        for _ in range(200):
            n = int(rng.integers(2, 9))
            w = random_strongly_connected(rng, n, rng.uniform(0.1, 0.6))
            lap = build_laplacian(WeightedDigraph(w))
            assert lap.classification.value == classify_bruteforce(w) == "StronglyConnected"
            spec = spectral_data(lap)
            assert np.abs(spec.xi - xi_cofactor(lap.entries)).max() <= 1e-9
            assert abs(spec.lambda2 - lambda2_charpoly(gap_matrix(lap, spec.xi))) <= 1e-8
        for _ in range(200):
            n = int(rng.integers(1, 9))
            w = random_digraph(rng, n, rng.uniform(0.05, 0.5))
            assert build_laplacian(WeightedDigraph(w)).classification.value == classify_bruteforce(w)
    assert timer.elapsed < 30.0


def _backend_pair(sc):
    lap = build_laplacian(sc.graph)
    spec = spectral_data(lap)
    x0 = resolve_initial_state(sc.initial_state, lap.n, spec.xi)
    runs = [run(lap, spec, sc.plan, x0, None, sc.horizon, backend=b) for b in ("expm", "rk4")]
    return spec, runs


def test_criterion_7_flow_correctness():
    """Flow correctness: backends, conservation, analytic 2-node"""
    with Timer() as timer:
        for name in ("example1", "example2"):
            spec, (a, b) = _backend_pair(example_scenario(name))
            assert a.x.shape == b.x.shape and a.phase == b.phase
            scale = np.abs(a.x).max(axis=1, keepdims=True)
            assert np.abs(a.x - b.x).max() <= 1e-8 * scale.max()
            assert (np.abs(a.x - b.x) <= 1e-8 * np.maximum(scale, 1e-300)).all()
            for traj in (a, b):
                report = verify_trajectory(traj, None, spec, _bare_cert(traj))
                assert report.check("flow_conservation").status == PASS
        (_, x), = flow([1.0, -1.0], build_laplacian(gen_ring(2)), 1.0, 1.0)
        assert np.abs(x - [math.exp(-2), -math.exp(-2)]).max() <= 1e-9
        (_, x), = flow([1.0, -1.0], build_laplacian(gen_ring(2)), 1.0, 1.0, backend="rk4")
        assert np.abs(x - [math.exp(-2), -math.exp(-2)]).max() <= 1e-9
    assert timer.elapsed < 5.0


def _bare_cert(traj):
    return Certificate(r=traj.r, s=traj.s, valid=False)


def test_criterion_8_hypothesis_gating():
    """Hypothesis gating reason codes"""
    ring = gen_ring(100)
    tree = gen_grown_tree(10, 100, EXAMPLE2_GRAPH_SEED)
    rings = WeightedDigraph.from_edges(
        6, [(0, 1, 1), (1, 2, 1), (2, 0, 1), (3, 4, 1), (4, 5, 1), (5, 3, 1)])
    table = [
        (ring, PinPlan(0, strength=ConstantStrength(11.0)), ()),
        (ring, PinPlan(0, strength=ConstantStrength(100.0)), (STRENGTH_OUT_OF_RANGE,)),
        (ring, PinPlan(0, strength=ConstantStrength(150.0)), (STRENGTH_OUT_OF_RANGE,)),
        (tree, PinPlan(3, strength=ConstantStrength(5.0)), ()),
        (tree, PinPlan(3, strength=ConstantStrength(10.0)), (STRENGTH_OUT_OF_RANGE,)),
        (tree, PinPlan(50, strength=ConstantStrength(5.0)), (NOT_IN_ROOT,)),
        (tree, PinPlan(99, strength=ConstantStrength(0.5)), (NOT_IN_ROOT,)),
        (rings, PinPlan(0, strength=ConstantStrength(0.5)), (NO_ROOT,)),
        (rings, PinPlan(4, strength=ConstantStrength(0.5)), (NO_ROOT,)),
    ]
    with Timer() as timer:
        for graph, plan, expected in table:
            _, _, cert = synthesize(graph, plan)
            assert cert.reasons == expected, (plan, cert.reasons)
            assert cert.valid == (expected == ())
    assert timer.elapsed < 1.0


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
