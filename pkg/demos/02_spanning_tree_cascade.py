"""
A ring with a random tree hanging off it
========================================

Ninety leaves are attached one at a time below uniformly chosen existing
agents.  Only the 10-ring at the root carries weight in the conserved
mean, so the controller must sit there; the leaves simply follow.
"""

import numpy as np

from impulsive_pinning import (build_laplacian, gen_grown_tree, mmatrix_diagnostics,
                               reorder_block_form)
from impulsive_pinning.scenario import example_scenario, run_scenario, synthesize
from impulsive_pinning.controller import ConstantStrength, PinPlan
from impulsive_pinning.generators import EXAMPLE2_GRAPH_SEED

graph = gen_grown_tree(10, 100, EXAMPLE2_GRAPH_SEED)
lap = build_laplacian(graph)
block = reorder_block_form(lap)
print("classification:", lap.classification.value)
print("block sizes: [%d, 1 x %d]" % (block.block_sizes[0], len(block.block_sizes) - 1))

# every leaf block is the 1x1 matrix [1]: it relaxes at rate 1 towards its parent
diag = mmatrix_diagnostics(lap)
print("leaf decay rates:", sorted({d.abscissa for d in diag}))

# pinning a leaf cannot move the mean
_, _, cert = synthesize(graph, PinPlan(r=50, strength=ConstantStrength(5.0)))
print("pin vertex 50:", cert.reasons)

# the reference plan: b = 5 every 15 time units on vertex 0
result = run_scenario(example_scenario("example2"))
cert, traj = result.certificate, result.trajectory
print("C = %.1f   T = %.2f   certificate reasons: %s" % (cert.big_c, cert.min_gap_t, cert.reasons))
print("the sufficient gap is about twice the one used, yet the run still converges:")
print("  %s after %d impulses, final var %.2e" % (traj.status, len(traj.impulses), traj.var[-1]))

# the root settles first, the leaves after it
root = result.spectral.xi > 0
dev = np.abs(traj.x - traj.s)
for t_probe in (0, 30, 90, 150, traj.t[-1]):
    i = np.searchsorted(traj.t, t_probe, side="right") - 1
    print("  t = %6.1f   root spread %.2e   leaf spread %.2e"
          % (traj.t[i], dev[i, root].sum(), dev[i, ~root].sum()))

print(result.report.summary())
