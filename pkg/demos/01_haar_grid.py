"""
Dyadic grids and the 2D Haar transform
======================================

Spectra live in heap order: slot 0 holds the mean, slot p sits at level
floor(log2 p) with children 2p and 2p+1.
"""
import numpy as np

from haarlab.grid import DyadicInterval, analyze2d, haar_profiles, l2norm, synthesize2d

depth = 3
n = 2 ** depth

# Each row of the profile matrix is one Haar function sampled on the n cells.
H = haar_profiles(depth)
print("Haar profiles at depth", depth)
print(np.round(H, 3))

# Orthonormality under the 1/n cell weight.
print("Gram matrix is identity:", np.allclose(H @ H.T / n, np.eye(n)))

# Slot 5 is the interval [1/4, 1/2): level 2, parent slot 2, children 10 and 11.
I = DyadicInterval.from_heap(5)
print(I, "measure", I.measure, "parent", I.parent(), "heap", I.heap)

# Vector-valued field with d = 2 components, analysed and rebuilt.
rng = np.random.default_rng(0)
f = rng.standard_normal((n, n, 2)) + 1j * rng.standard_normal((n, n, 2))
c = analyze2d(f)
print("round-trip error:", np.abs(synthesize2d(c) - f).max())
print("Parseval: ||f|| =", l2norm(f), " ||c|| =", np.linalg.norm(c))
