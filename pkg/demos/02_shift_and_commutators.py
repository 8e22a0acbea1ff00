"""
The truncated Haar shift and its commutators
============================================

The shift sends h_I to (h_{I-} - h_{I+}) / sqrt(2) and kills the mean and
the finest level.
"""
import numpy as np

from haarlab.grid import project_cancellative, synthesize2d
from haarlab.operators import (commutator2p, commutator_operator, operator_norm, shift1d,
                               shift_operator, shift_x)
from haarlab.experiments import generate_symbol

depth, d = 4, 2
n = 2 ** depth

e = np.zeros(n)
e[3] = 1.0
print("shift of slot 3:", np.nonzero(shift1d(e))[0], shift1d(e)[[6, 7]])

# Away from the finest level the shift is an isometry.
rng = np.random.default_rng(1)
c = project_cancellative(rng.standard_normal((n, n, d)), depth - 2)
print("isometry:", np.linalg.norm(shift_x(c)), np.linalg.norm(c))
print("norm of Sh_x on safe supports:", operator_norm(shift_operator(depth, d, 0, max_level=depth - 2)))

# Two-parameter commutator with a matrix symbol.
B = generate_symbol("random-gaussian", depth, d, seed=2)
f = rng.standard_normal((n, n, d))
out = commutator2p(synthesize2d(B), f)
print("||[[M_B, Sh_1], Sh_2] f|| =", np.linalg.norm(out) / n)

T = commutator_operator(synthesize2d(B), "shift")
print("operator norm (lanczos):", operator_norm(T))
print("operator norm (power)  :", operator_norm(T, method="power", tol=1e-13))
