"""Finite-scale characterization checks and gauge-aware comparison.

These are diagnostics, not proofs: the admissibility conditions on spectral
data are asymptotic statements, so every check here reports what can be seen
at a finite truncation (per-entry algebra, remainder decay, a completeness
proxy) together with pass flags against configurable thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import SpectralDataSet, herm, mat
from .errors import GridMismatch
from .model import ModelConstants, model_spectral_data

_PSD_TOL = 1e-10
_EQ_TOL = 1e-8
# Relative cutoff for keeping an eigendirection of a measured weight matrix.
# Extracted weights carry forward-solver noise well above 1e-10, so anything
# smaller than this is treated as a numerical zero, not a genuine channel.
_EVEC_TOL = 1e-6


@dataclass
class EntryVerdict:
    n: int
    k: int
    hermitian: bool
    psd: bool
    rank: int
    rank_matches: bool
    cluster_consistent: bool


@dataclass
class ConditionIReport:
    entries: list[EntryVerdict]
    passed: bool


def check_condition_i(data: SpectralDataSet, rank_tol: float = 1e-8) -> ConditionIReport:
    """Per-entry weight algebra: Hermitian, PSD, rank = multiplicity,
    and equal lambdas carrying equal weights.

    Report-only; the overall flag is the conjunction of all verdicts.
    """
    verdicts = []
    # cluster entries by lambda to test equal-lambda consistency
    by_lam: dict[int, list] = {}
    order = sorted(data.entries, key=lambda e: e.lam)
    cid = -1
    prev = None
    assign = {}
    for e in order:
        if prev is None or abs(e.lam - prev) > _EQ_TOL * (1.0 + abs(e.lam)):
            cid += 1
        assign[(e.n, e.k)] = cid
        by_lam.setdefault(cid, []).append(e)
        prev = e.lam
    for e in data.entries:
        a = e.alpha
        scale = max(float(np.abs(a).max()), 1.0)
        hermitian = bool(np.abs(a - a.conj().T).max() <= 1e-8 * scale)
        eigs = np.linalg.eigvalsh(herm(a))
        psd = bool(eigs.min() >= -_PSD_TOL * scale)
        rank = int((eigs > rank_tol * scale).sum())
        rank_matches = rank == e.multiplicity
        cluster = by_lam[assign[(e.n, e.k)]]
        consistent = all(
            np.abs(a - other.alpha).max() <= _EQ_TOL * scale for other in cluster)
        verdicts.append(EntryVerdict(e.n, e.k, hermitian, psd, rank,
                                     rank_matches, consistent))
    passed = all(v.hermitian and v.psd and v.rank_matches and
                 v.cluster_consistent for v in verdicts)
    return ConditionIReport(entries=verdicts, passed=passed)


@dataclass
class AsymptoticsReport:
    kappa: dict[tuple[int, int], float]
    K_norm: dict[tuple[int, int], float]
    kappa_tail_l2: float
    K_tail_l2: float
    kappa_passed: bool
    K_passed: bool
    passed: bool


def check_asymptotics(data: SpectralDataSet, constants: ModelConstants,
                      decay_factor: float = 0.5,
                      floor: float = 1e-6) -> AsymptoticsReport:
    """Remainder diagnostics of the eigenvalue and weight asymptotics.

    kappa_nk = rho_nk - (n + r_k) per entry; K_nk is the weight remainder in
    the outer-factor normalization, one matrix per level and root class
    (class weights are summed before comparing against the class projector).
    The decay test compares the max remainder over the last third of levels
    against decay_factor times the max over the first third (with an
    absolute floor), which passes decaying tails, tolerates exact zeros, and
    flags constant remainders.
    """
    m = data.m
    T1 = constants.T1
    T1p = constants.T1p
    kappa = {}
    by_index = {}
    for e in data.entries:
        by_index[(e.n, e.k)] = e
        if e.n >= 1:
            kappa[(e.n, e.k)] = float(e.rho - (e.n + constants.rk[e.k - 1]))
    K_norm = {}
    levels = sorted({e.n for e in data.entries if e.n >= 1})
    for n in levels:
        for rep in constants.calJ:
            outer_inv = T1 + (1.0 / (n + constants.rk[rep - 1])) * T1p
            ks = constants.Jk[rep]
            alphas = [by_index[(n, k)].alpha_prime for k in ks
                      if (n, k) in by_index]
            if not alphas:
                continue
            class_sum = np.sum(alphas, axis=0)
            Knk = (np.pi / 2.0) * (outer_inv @ class_sum @ outer_inv) \
                - constants.Ak[rep]
            K_norm[(n, rep)] = float(np.linalg.norm(Knk, 2))

    def decay(seq: list[float]) -> tuple[float, bool]:
        if not seq:
            return 0.0, True
        third = max(1, len(seq) // 3)
        head = max(seq[:third])
        tail = seq[-third:]
        tail_l2 = float(np.sqrt(np.sum(np.square(tail))))
        ok = max(tail) <= max(decay_factor * head, floor)
        return tail_l2, ok

    kap_seq = [abs(kappa[key]) for key in sorted(kappa)]
    K_seq = [K_norm[key] for key in sorted(K_norm)]
    kappa_tail, kappa_ok = decay(kap_seq)
    K_tail, K_ok = decay(K_seq)
    return AsymptoticsReport(kappa=kappa, K_norm=K_norm,
                             kappa_tail_l2=kappa_tail, K_tail_l2=K_tail,
                             kappa_passed=kappa_ok, K_passed=K_ok,
                             passed=kappa_ok and K_ok)


@dataclass
class CompletenessProxy:
    """Finite completeness heuristic built from the weight ranges.

    chi holds a basis of Ran(alpha) per entry (eigenvectors scaled by the
    square root of their eigenvalues); Bnk the rescale-conjugated weights;
    Enk orthonormal bases of Ran(Bnk).  gram_min is the smallest eigenvalue
    of the Gram matrix of the unit-normalized Y family; slot_coverage the
    smallest squared projection of a model slot function onto the family
    span.  Evidence, not proof: bounded-away-from-zero values as n_cut grows
    support the basis property, nothing at finite scale decides it.
    """

    chi: dict[tuple[int, int], np.ndarray]
    Bnk: dict[tuple[int, int], np.ndarray]
    Enk: dict[tuple[int, int], np.ndarray]
    gram_min: float
    slot_coverage: float
    family_size: int


def _y_columns(x: np.ndarray, rho: float, T1: np.ndarray, T1p: np.ndarray,
               vecs: np.ndarray) -> np.ndarray:
    """Sampled rescaled model solutions applied to the columns of vecs."""
    if rho > 0.0:
        sol = (np.cos(rho * x)[:, None, None] * T1
               + np.sin(rho * x)[:, None, None] * T1p)
    else:
        sol = np.broadcast_to(T1, (x.size,) + T1.shape) \
            + x[:, None, None] * T1p
    return sol @ vecs  # (nx, m, ncols)


def completeness_proxy(data: SpectralDataSet, constants: ModelConstants,
                       n_cut: int = 20, quad_grid: int = 256) -> CompletenessProxy:
    """Gram-minimum proxy for the completeness condition on the weight ranges.

    Requires the per-entry algebra (check_condition_i) to pass for the
    rank/eigenvector extraction to be meaningful.
    """
    m = data.m
    T1 = constants.T1
    T1p = constants.T1p
    nodes, weights = np.polynomial.legendre.leggauss(quad_grid)
    x = 0.5 * np.pi * (nodes + 1.0)
    w = 0.5 * np.pi * weights

    chi: dict[tuple[int, int], np.ndarray] = {}
    Bnk: dict[tuple[int, int], np.ndarray] = {}
    Enk: dict[tuple[int, int], np.ndarray] = {}
    columns = []
    for e in data.entries:
        if e.n > n_cut or np.abs(e.alpha_prime).max() == 0.0:
            continue
        scale = max(float(np.abs(e.alpha_prime).max()), 1e-300)
        evals, evecs = np.linalg.eigh(herm(e.alpha_prime))
        sel = evals > _EVEC_TOL * scale
        chi[(e.n, e.k)] = evecs[:, sel] * np.sqrt(evals[sel])
        tinv = T1 + (1.0 / e.rho) * T1p if e.rho > 0.0 else np.eye(m)
        B = (np.pi / 2.0) * (tinv @ e.alpha_prime @ tinv)
        Bnk[(e.n, e.k)] = B
        bvals, bvecs = np.linalg.eigh(herm(B))
        bsel = np.abs(bvals) > _EVEC_TOL * max(float(np.abs(bvals).max()), 1e-300)
        E = bvecs[:, bsel]
        Enk[(e.n, e.k)] = E
        if E.shape[1]:
            columns.append(_y_columns(x, float(e.rho), T1, T1p, E))

    if not columns:
        return CompletenessProxy(chi, Bnk, Enk, 0.0, 0.0, 0)
    Y = np.concatenate(columns, axis=2)  # (nx, m, F)
    F = Y.shape[2]
    norms = np.sqrt(np.einsum("xif,x,xif->f", Y.conj(), w, Y).real)
    Y = Y / norms[None, None, :]
    gram = np.einsum("xif,x,xig->fg", Y.conj(), w, Y)
    gram = herm(gram)
    gram_min = float(np.linalg.eigvalsh(gram).min())

    # model slot functions, projected onto the data family span
    slots = []
    for em in model_spectral_data(constants, n_cut).entries:
        if np.abs(em.alpha_prime).max() == 0.0:
            continue
        tinv = T1 + (1.0 / em.rho) * T1p if em.rho > 0.0 else np.eye(m)
        B = (np.pi / 2.0) * (tinv @ em.alpha_prime @ tinv)
        bvals, bvecs = np.linalg.eigh(herm(B))
        vecs = bvecs[:, np.abs(bvals) > _EVEC_TOL * max(float(np.abs(bvals).max()),
                                                        1e-300)]
        if vecs.shape[1]:
            slots.append(_y_columns(x, float(em.rho), T1, T1p, vecs))
    S = np.concatenate(slots, axis=2)
    snorm = np.sqrt(np.einsum("xis,x,xis->s", S.conj(), w, S).real)
    S = S / snorm[None, None, :]
    cross = np.einsum("xif,x,xis->fs", Y.conj(), w, S)
    coeff, *_ = np.linalg.lstsq(gram, cross, rcond=1e-12)
    proj = np.einsum("fs,fs->s", cross.conj(), coeff).real
    slot_coverage = float(proj.min())
    return CompletenessProxy(chi, Bnk, Enk, gram_min, slot_coverage, F)


@dataclass
class GaugeComparison:
    H1_est: np.ndarray
    sigma_distance: float
    H2_distance: float
    sigma_raw_max: float
    H2_raw: float
    passed: bool = field(default=True)


def compare_modulo_gauge(x, sigmaA, H2A, sigmaB, H2B, T1, T2,
                         xB=None, tol: float | None = None) -> GaugeComparison:
    """Distance between two (sigma, H2) pairs modulo the shared gauge freedom.

    The freedom is a Hermitian block H1 in the range of T1perp: sigma may
    absorb +H1 while H2 gives up T2 H1 T2.  The estimate H1_est is the
    T1perp-block of the mean difference; distances are reported after
    removing it.  sigma_distance is the L2(0, pi) Frobenius norm of the
    gauge-corrected difference (trapezoid on the given grid); H2_distance
    the spectral norm of the corrected H2 difference.
    """
    x = np.asarray(x, dtype=float)
    if xB is not None:
        xB = np.asarray(xB, dtype=float)
        if xB.shape != x.shape or not np.allclose(xB, x, rtol=0, atol=1e-12):
            raise GridMismatch("reconstruction grids differ; resample first")
    sigmaA = np.asarray(sigmaA, dtype=complex)
    sigmaB = np.asarray(sigmaB, dtype=complex)
    if sigmaA.shape != sigmaB.shape or sigmaA.shape[0] != x.size:
        raise GridMismatch("sigma arrays do not share the grid shape")
    T1 = mat(T1)
    T2 = mat(T2)
    m = T1.shape[0]
    T1p = np.eye(m) - T1
    H2A = mat(H2A)
    H2B = mat(H2B)

    diff = sigmaA - sigmaB
    mean = np.trapezoid(diff, x, axis=0) / (x[-1] - x[0])
    H1_est = herm(T1p @ mean @ T1p)
    corrected = diff - H1_est
    sq = np.einsum("xij,xij->x", corrected.conj(), corrected).real
    sigma_distance = float(np.sqrt(np.trapezoid(sq, x)))
    H2_corr = H2A - H2B + T2 @ H1_est @ T2
    H2_distance = float(np.linalg.norm(H2_corr, 2))
    report = GaugeComparison(
        H1_est=H1_est,
        sigma_distance=sigma_distance,
        H2_distance=H2_distance,
        sigma_raw_max=float(np.abs(diff).max()),
        H2_raw=float(np.linalg.norm(H2A - H2B, 2)),
    )
    if tol is not None:
        report.passed = sigma_distance <= tol and H2_distance <= tol
    return report
