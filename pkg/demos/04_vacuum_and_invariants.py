"""
The vacuum, the number operator and positivity
===============================================

For a regular kernel the vacuum projection E is subharmonic:
T_t(E) - E is positive.  The number operator commutes with every jump
operator and evolves only through the Hamiltonian.
"""

import numpy as np

from qbnoise import build_hamiltonian, build_model, evolve_heisenberg, number_operator
from qbnoise.semigroup import choi_matrix, vacuum_projection
from qbnoise.weighted import canonical_kernel, nearest_neighbor_kernel

for label, K in (("canonical", canonical_kernel(3)), ("nearest neighbour", nearest_neighbor_kernel(3, 1, 1, 1))):
    model = build_model(K, build_hamiltonian(3, "one_body", eps=[0.5, -0.2, 1.0]))
    E = vacuum_projection(3)
    N = number_operator(3).toarray()
    for t in (0.5, 2.0):
        gap = evolve_heisenberg(model, E, t) - E
        drift = np.abs(evolve_heisenberg(model, N, t) - N).max()
        print(f"{label:18s} t={t}: min eig of T_t(E)-E {np.linalg.eigvalsh(gap).min():+.2e}"
              f"   |T_t(N)-N| {drift:.1e}")

# complete positivity: the Choi matrix of the two-mode channel
model = build_model(nearest_neighbor_kernel(2, 1.0, 0.3, 0.5))
print("Choi spectrum at t=1:", np.round(np.linalg.eigvalsh(choi_matrix(model, 1.0)), 6) + 0.0)
