"""Bound the steady-state heat current of a boundary-driven spin chain.

A 1x3 chain couples to a hot bath on the left and a cold bath on the
right.  Stationarity constraints (tr(L+[P] rho) = 0 for generated words P)
pin the current from both sides without ever solving for the state.

Run:  python3 demos/steady_current.py
"""

from momentbound import models, oracle, sdp
from momentbound.models import BathSpec
from momentbound.pauli import strings_up_to_weight
from momentbound.relax import (
    MomentRegistry,
    build_moment_matrix,
    generate_steady_constraints,
    register_objective,
    select_moment_basis,
)

model = models.build_boundary_driven(
    1, 3, g=1.0, J=1.0,
    hot=BathSpec(temperature=1.0, rate=0.001),
    cold=BathSpec(temperature=0.1, rate=0.011),
)
current = models.heat_current_poly(model, "hot")
j_exact = oracle.exact_heat_current(model, "hot")
print("model: 1x3 chain, hot bath (T=1.0) left, cold bath (T=0.1) right")
print(f"exact steady-state current   {j_exact:+.6e}")

reg = MomentRegistry(3)
register_objective(current, reg)
seeds = [p for p in current.strings() if not p.is_identity]
rows = generate_steady_constraints(model, seeds, 400, reg)
# the closure starting from the current operator is tiny here: 15 rows
# over 16 words, enough to pin the current exactly
print(f"stationarity rows generated  {len(rows)}")

block = build_moment_matrix(select_moment_basis(reg, len(reg)), reg)
prob = sdp.assemble(current, reg, moment_blocks=[block], constraints=rows)
lo, hi = sdp.solve_both(prob)
print(f"certified bracket            [{lo.value:+.6e}, {hi.value:+.6e}]")
assert lo.value - 1e-9 <= j_exact <= hi.value + 1e-9
print()
print("every density matrix stationary under this dynamics carries a")
print("current inside the bracket; the exact one of course does.")
