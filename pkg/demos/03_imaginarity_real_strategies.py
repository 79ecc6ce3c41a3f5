"""How far can real quantum mechanics push the imaginarity witness?

The complex reference realization reaches 4 + sqrt2. Real strategies with
projective measurements stay at 5, but allowing a real, non-projective
measurement on the third input reaches 4 + sqrt2 as well: the explicit
realization below uses only real matrices.
"""

import numpy as np

from qres import freesets
from qres.freesets import membership
from qres.optimizer import Constrain, OptimizationConfig, certify_bound
from qres.qmath import named_state, proj
from qres.scenario import OperationBox, PreparationBox, simulate
from qres.witnesses import imaginarity_qubit

spec = imaginarity_qubit()
print(f"complex reference realization: {spec.value(spec.reference_table().probs):.9f}")

proj_set = freesets.real_states(2, "projective")
cb = certify_bound(spec, proj_set, Constrain.BOTH, OptimizationConfig(restarts=10, seed=3))
print(f"real states, real projective measurements (10 restarts): {cb.value:.9f}")

b = np.sqrt(2) - 1
bar0, bar1 = proj(named_state("bar0")), proj(named_state("bar1"))
e0 = bar1 + b * bar0
states = [proj(named_state("0")), proj(named_state("plus")), bar1, bar1]
ops = OperationBox([
    [bar0, bar1],
    [proj(named_state("barplus")), proj(named_state("barminus"))],
    [e0, np.eye(2) - e0],
])
real = freesets.real_states(2)
all_real = all(membership(real, r).is_member for r in states) and all(
    membership(real, e, kind="effect").is_member for inst in ops.instruments for e in inst)
value = spec.value(simulate(PreparationBox(states), ops).probs)
print(f"real states, real POVM on x=2: {value:.9f} (every object real: {all_real})")
print("third-input effect E0 =\n", np.round(e0.real, 6))
