"""
Second-order accuracy of the Dirichlet barrier
==============================================

y solves -y'' + y = 1 on (0, 1) with y = 0 at both ends, so
y(x) = 1 - cosh(x - 1/2) / cosh(1/2).  Halving h should cut the max-norm error
by four.
"""

import numpy as np

from gmsteady.study import convergence_study

rep = convergence_study([33, 65, 129, 257])
for n, err in zip(rep.n_list, rep.errors):
    print(f"n={n:4d}  error={err:.3e}")
print(f"fitted slope in log(h): {rep.slope:.4f}")
print("successive ratios:", np.round(np.array(rep.errors[:-1]) / np.array(rep.errors[1:]), 3))
