"""
Quantum exclusion dynamics and its classical shadow
===================================================

Starting from a diagonal state, the quantum semigroup keeps the state
diagonal and its populations follow a continuous-time exclusion process.
We integrate both and add a Gillespie estimate.
"""

import numpy as np

from qbnoise import build_model, classical_generator, evolve_classical, evolve_schrodinger, gillespie_sample
from qbnoise.classical import configuration_label
from qbnoise.semigroup import diagonal_state
from qbnoise.weighted import nearest_neighbor_kernel

# three sites, hopping right at rate 1 and left at rate 0.5, with dephasing 0.2
K = nearest_neighbor_kernel(3, 1.0, 0.5, 0.2)
model = build_model(K)
Q = classical_generator(K)

p0 = np.zeros(8)
p0[0b011] = 1.0  # particles on sites 0 and 1
rho0 = diagonal_state(p0)

for t in (0.5, 1.0, 2.0):
    rho = evolve_schrodinger(model, rho0, t)
    p_q = np.real(np.diag(rho))
    p_c = evolve_classical(Q, p0, t)
    p_mc = gillespie_sample(K, 0b011, t, 50_000, seed=1)
    print(f"t = {t}: largest coherence {np.abs(rho - np.diag(np.diag(rho))).max():.1e}")
    for s in np.flatnonzero(p_c > 1e-3):
        print(f"  {configuration_label(s):8s} quantum {p_q[s]:.6f}  chain {p_c[s]:.6f}  sampled {p_mc[s]:.4f}")
