"""Two more resources with the same machinery.

Magic: the coherence expression evaluated against the stabilizer
octahedron. The free maximum is found exactly by trying every choice of
stabilizer vertices with the best measurement for each choice.

Purity: a single preparation read out in a basis; the maximally mixed
state gives 1/d whatever rank-one projective measurement is used.
"""

from qres import freesets
from qres.optimizer import Constrain, OptimizationConfig, certify_bound, enumerate_vertex_bound
from qres.witnesses import MAGIC_PAPER_BOUND, evaluate, magic_qubit, purity

spec = magic_qubit()
exact = enumerate_vertex_bound(spec, freesets.stabilizer_qubit())
seesaw = certify_bound(spec, freesets.stabilizer_qubit(), Constrain.STATES_ONLY, OptimizationConfig(restarts=50))
ref = evaluate(spec, spec.reference_table())
print(f"magic: vertex enumeration {exact.value:.9f}, see-saw {seesaw.value:.9f}, published {MAGIC_PAPER_BOUND}")
print(f"       reference value {ref.value:.6f} -> {ref.verdict.value}")

for d in (2, 3, 4):
    spec = purity(d)
    cb = certify_bound(spec, freesets.maximally_mixed(d), Constrain.STATES_ONLY, OptimizationConfig(restarts=5))
    ref = evaluate(spec, spec.reference_table())
    print(f"purity d={d}: free maximum {cb.value:.9f} (1/d = {1 / d:.9f}), pure |0> gives {ref.value:.3f}")
