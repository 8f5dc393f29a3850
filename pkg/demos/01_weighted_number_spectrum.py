"""
The spectrum of a weighted number operator
==========================================

S_w is diagonal in the subset basis.  This walk-through builds it from
ladder operators, reads off its eigenvalues and compares them with the
closed form, then looks at the growth bounds.
"""

import numpy as np

from qbnoise import TransitionKernel, number_operator, spectral_norm, theta_table, weighted_number_direct
from qbnoise.fock import mask_to_subset

# a small non-symmetric kernel on two modes
K = TransitionKernel([[1.0, 2.0], [3.0, 4.0]])
S = weighted_number_direct(K).toarray().real

# off-diagonal part is exactly zero
print("max off-diagonal entry:", np.abs(S - np.diag(np.diag(S))).max())

for mask, (diag, closed) in enumerate(zip(np.diag(S), theta_table(K))):
    print(f"  subset {str(mask_to_subset(mask)):8s} S_w entry {diag:5.1f}   theta {closed:5.1f}")

# the operator norm is the largest eigenvalue
print("||S_w|| =", spectral_norm(weighted_number_direct(K)), " max theta =", theta_table(K).max())

# a random kernel on five modes: theta grows at most linearly in the particle number
rng = np.random.default_rng(0)
K = TransitionKernel(rng.uniform(0.2, 1.0, (5, 5)))
th = theta_table(K)
card = np.diag(number_operator(5).toarray()).real
for m in range(6):
    sel = th[card == m]
    print(f"  {m} particles: theta in [{sel.min():.3f}, {sel.max():.3f}]"
          f"   beta*m = {K.beta * m:.3f}   2*alpha*m = {2 * K.alpha * m:.3f}")
