"""
Commutation relations with a weighted number operator
=====================================================

Moving d_m past S_w produces two one-dimensional weighted number
operators and a scalar correction.  The correction coefficient is
2 w[m, m] + sum_j w[j, m].  Doubling the whole bracket instead gives an
identity that fails by O(1) on a generic kernel.
"""

import numpy as np

from qbnoise.weighted import random_kernel
from qbnoise.algebra import perturbation_control, verify_weighted_commutators_2d

rng = np.random.default_rng(7)

# %% residuals for the correct coefficient
for n in (2, 3, 4, 5):
    K = random_kernel(n, rng)
    worst = max(r.residual for r in verify_weighted_commutators_2d(K))
    print(f"n={n}: largest residual {worst:.2e}")

# %% the doubled coefficient as a negative control
K = random_kernel(3, rng, low=0.1)
for r in verify_weighted_commutators_2d(K, variant="doubled"):
    print(f"  mode {r.params['m']}: residual {r.residual:.3f}  (pass={r.passed})")

# %% a checker that reports zero for everything is useless; nudging one
# weight by 1e-3 must show up in the residual
print("residual after perturbing w[0, 1]:", perturbation_control(K, 0, 1, 1e-3))
