"""Certify the ground-state energy of a 2x2 transverse-field Ising patch.

Walks the full pipeline once, printing each stage: exact diagonalisation
for reference, the moment-matrix lower bound with perfect data, then the
same bound fed by 10^5 simulated shots split over all weight-<=2 words.

Run:  python3 demos/energy_bounds.py
"""

import numpy as np

from momentbound import models, oracle, sampler, sdp
from momentbound.confidence import build_intervals
from momentbound.pauli import strings_up_to_weight
from momentbound.relax import (
    MomentRegistry,
    ROLE_MEASURED,
    build_moment_matrix,
    register_objective,
    select_moment_basis,
)

h = models.build_tfi_2d(2, 2, g=1.0, J=1.0)
e0, gs = oracle.exact_ground_state(h)
print(f"model: 2x2 transverse-field Ising, g = J = 1")
print(f"exact ground-state energy      {e0:+.9f}")

# moment matrix over the 30 best-connected words of weight <= 2; small
# enough for an interior-point backend, so bounds are sharp to ~1e-9
reg = MomentRegistry(4)
register_objective(h, reg)
words = [p for p in strings_up_to_weight(4, 2) if not p.is_identity]
for p in words:
    reg.register(p, role=ROLE_MEASURED, count=True)
basis = select_moment_basis(reg, 30)
block = build_moment_matrix(basis, reg)

ideal = sdp.solve(sdp.assemble(h, reg, moment_blocks=[block]), "lower")
print(f"SDP bound, perfect data        {ideal.value:+.9f}   ({ideal.solver})")

# now pretend we only have shots: 10^4 spread over the 66 measured words
src = sampler.ExactStateSource(gs, seed=1)
recs = sampler.sample_records(src, words, 10_000 // len(words), seed=1, repeat=0)
prob = sdp.assemble(
    h, reg, moment_blocks=[block],
    intervals=build_intervals(recs, 0.003), confidence=0.997,
)
noisy = sdp.solve(prob, "lower", warm=ideal.warm)
combined = max(noisy.value, ideal.value)
print(f"SDP bound, 10^4 shots (99.7%)  {noisy.value:+.9f}   gap {e0 - noisy.value:.1e}")
print(f"combined (never worse)         {combined:+.9f}")
print()
print("the finite-shot bound is certified: with probability >= 0.997 the")
print("true energy sits above it, no matter what state produced the shots.")
print("intersecting with the data-free bound can only help, so a scenario")
print("run reports the max of the two.")
