"""Walk through the unperturbed model operator for a mixed boundary geometry.

The model has sigma = 0 and H2 = 0, so everything about it is closed-form:
the characteristic roots r_k, the residue matrices A_k, the eigenvalue grid
(n + r_k)^2, and the Weyl matrix with its simple poles.  This script builds
those constants for a 2x2 problem where one channel sees a Dirichlet-type
condition at x = 0 and the other a Neumann-type one, then checks the pole
structure of the model Weyl matrix against the model weights.
"""

import numpy as np

from slq import (
    build_model_constants,
    build_index_set,
    model_spectral_data,
    model_weyl,
)

np.set_printoptions(precision=6, suppress=True)

T1 = np.diag([1.0, 0.0])   # projector: channel 0 free, channel 1 pinned at x=0
T2 = np.eye(2)             # both channels free at x=pi

print("boundary projectors")
print("T1 =\n", T1)
print("T2 =\n", T2)
print()

mc = build_model_constants(T1, T2)

# r_k in [0, 1) fixes where each eigenvalue branch sits inside a unit cell.
# Distinct values of r_k split the channels into root classes; degenerate
# branches share a class and their residues merge.
print("characteristic roots r_k :", mc.rk)
print("distinct class reps      :", mc.calJ)
print("class membership         :", mc.Jk)
print("p_perp (shared kernel)   :", mc.p_perp)
print()

for k in mc.calJ:
    Ak = mc.Ak[k]
    print(f"A_{k} (residue factor for class of k={k}):")
    print(Ak)
    # each A_k is a rank-|class| orthoprojector onto its channel span
    evals = np.linalg.eigvalsh(Ak)
    print("  eigenvalues:", np.round(evals, 10))
print()

# The index set (n, k) enumerates one eigenvalue slot per channel per level,
# except the p_perp slots that the shared kernel removes at n = 0.
pairs = build_index_set(mc.p_perp, mc.m, 3)
print("index pairs through level 3:", pairs)
print()

data = model_spectral_data(mc, 4)
print("model spectrum, lambda_nk = (n + r_k)^2")
print(f"{'(n,k)':>8} {'rho':>10} {'lambda':>12}  rank(alpha)")
for e in data.entries:
    rank = np.linalg.matrix_rank(e.alpha, tol=1e-10)
    print(f"({e.n},{e.k})".rjust(8), f"{e.rho:10.6f} {e.lam:12.6f}  {rank}")
print()

# The model Weyl matrix is meromorphic with a simple pole at every model
# eigenvalue; the residue there is the (sign-weighted) model weight.  Probe
# one pole with a small circular contour and compare.
target = data.get(1, 1)
lam0 = target.lam
radius = 0.05
ts = np.exp(2j * np.pi * np.arange(64) / 64)
ring = lam0 + radius * ts
res = np.zeros((2, 2), complex)
for z, t in zip(ring, ts):
    res += model_weyl(T1, T2, z) * (radius * t)
res /= 64

print(f"contour residue of M0 at lambda = {lam0:.6f}:")
print(res.real)
print("model weight alpha'_{1,1}:")
print(target.alpha_prime.real)
print("difference:", np.abs(res - target.alpha_prime).max())
