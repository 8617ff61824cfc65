"""Decide whether a finite eigenvalue/weight table could come from an operator.

Three screens, applied to measured data from a 2x2 problem and then to a
deliberately corrupted copy:

  1. per-entry weight algebra (Hermitian, PSD, rank = multiplicity)
  2. remainder decay against the model lattice and model projectors
  3. a Gram-minimum proxy for completeness of the weight ranges

None of these proves the data admits an operator; failing any of them
disproves it.
"""

import numpy as np

from slq import (
    ProblemSpec,
    SigmaFunction,
    SpectralDataSet,
    build_model_constants,
    check_asymptotics,
    check_condition_i,
    completeness_proxy,
    extract_spectral_data,
    validate_problem,
)

T1 = np.diag([1.0, 0.0])
T2 = np.eye(2)
H2 = np.diag([0.3, 0.0])
M0 = np.array([[0.2, 0.1 - 0.05j], [0.1 + 0.05j, -0.1]])
M1 = np.array([[0.15, 0.1j], [0.05, 0.1]])
sigma = SigmaFunction.trig([M0, M1])

problem = validate_problem(ProblemSpec(m=2, T1=T1, T2=T2, H2=H2, sigma=sigma))
mc = build_model_constants(T1, T2)

n_max = 8
data = extract_spectral_data(problem, n_max, constants=mc)
print(f"measured data: {len(data.entries)} entries through level {n_max}")
print()

rep1 = check_condition_i(data)
print("screen 1, weight algebra:", "pass" if rep1.passed else "FAIL")

rep2 = check_asymptotics(data, mc)
print("screen 2, remainder decay:", "pass" if rep2.passed else "FAIL")
print(f"  kappa tail l2 = {rep2.kappa_tail_l2:.4f}, "
      f"K tail l2 = {rep2.K_tail_l2:.4f}")
kmax = max(abs(v) for v in rep2.kappa.values())
print(f"  largest |kappa_nk| = {kmax:.4f}")

rep3 = completeness_proxy(data, mc, n_cut=n_max)
print("screen 3, completeness proxy:")
print(f"  gram_min = {rep3.gram_min:.3e} over a family of "
      f"{rep3.family_size} functions")
print(f"  slot_coverage = {rep3.slot_coverage:.3e}")
print()

# now break it: flip the sign of one weight matrix
items = [(e.n, e.k, e.lam, -e.alpha if (e.n, e.k) == (2, 1) else e.alpha)
         for e in data.entries]
bad = SpectralDataSet.build(2, items, shift=data.shift)
repb = check_condition_i(bad)
print("corrupted copy (weight (2,1) negated):",
      "pass" if repb.passed else "FAIL")
for v in repb.entries:
    if not (v.hermitian and v.psd and v.rank_matches):
        print(f"  flagged entry (n,k)=({v.n},{v.k}): psd={v.psd}")

# and drift one late eigenvalue off its lattice slot
items = [(e.n, e.k, e.lam + (2.0 if (e.n, e.k) == (7, 1) else 0.0), e.alpha)
         for e in data.entries]
drift = SpectralDataSet.build(2, items, shift=data.shift)
repd = check_asymptotics(drift, mc)
print("drifted copy (lambda (7,1) moved by 2.0):",
      "pass" if repd.passed else "FAIL")
print(f"  kappa at (7,1) now {repd.kappa[(7, 1)]:.4f}, "
      f"was {rep2.kappa[(7, 1)]:.4f}")
