"""
Where do the sufficient conditions hold?
========================================

Sweep the impulse strength b and the gap dt on the 100-ring and compare
what the certificate promises with what the simulation does.
"""

from collections import Counter

from impulsive_pinning.scenario import example_scenario, parse_grid, sweep, sweep_csv

sc = example_scenario("example1")

# certificates only: strengths at or above 1/xi_0 = 100 are never admissible
rows = sweep(sc, parse_grid(["b=10:120:10"]), simulate_runs=False)
for row in rows:
    print("b = %5.0f   valid %-5s  %s" % (row["b"], row["valid"], row["reasons"] or "-"))

# with simulation: short gaps break the certificate but often still converge
rows = sweep(sc, parse_grid(["b=2,11,50,99", "dt=50,500,1867"]), simulate_runs=True)
print()
print(sweep_csv(rows))

tally = Counter((row["valid"], row["outcome"]) for row in rows)
for (valid, outcome), count in sorted(tally.items()):
    print("certificate %-5s  outcome %-12s  %d runs" % (valid, outcome, count))
