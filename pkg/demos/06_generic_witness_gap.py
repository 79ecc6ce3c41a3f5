"""A witness for any table that free resources cannot reproduce.

The generic witness measures the l1 distance of p(0|x,y) to a reference
table. Its margin is the smallest distance a free realization can reach,
estimated here by alternating linear programs over mixtures of free
vertices and arbitrary measurements.
"""

from qres import freesets
from qres.optimizer import OptimizationConfig, gap_search
from qres.ranktest import state_test_construction
from qres.scenario import simulate
from qres.witnesses import evaluate, generic_witness

prep, ops = state_test_construction(2, 3)
reference = simulate(prep, ops)

g = gap_search(reference, freesets.incoherent(2), OptimizationConfig(restarts=5, seed=4))
epsilon = -g.value
print(f"closest incoherent realization is at l1 distance {epsilon:.6f}")

spec = generic_witness(reference, epsilon=epsilon)
res = evaluate(spec, reference)
print(f"witness bound -epsilon = {spec.free_bound:.6f}")
print(f"reference table: value {res.value:.6f} -> {res.verdict.value}")
