"""Forward spectral solver.

Integrates the first-order quasi-derivative system for matrix solutions,
evaluates the characteristic matrix, locates eigenvalues (real line and the
negative axis), and extracts weight matrices as contour residues of the
matrix Weyl function.

All heavy paths are batched over the spectral parameter: one adaptive DOP853
integration carries a stack of lambda values, which keeps the eigenvalue scan
and the residue contours fast.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .core import RunConfig, SpectralDataSet, ValidatedProblem
from .errors import (
    AtEigenvalue,
    ContourThroughEigenvalue,
    IntegratorFailure,
    NoConvergence,
    SlotMismatch,
)
from .model import ModelConstants, build_model_constants

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0
_CHUNK = 384


def _propagate_chunk(problem: ValidatedProblem, lams: np.ndarray, want_zeta: bool,
                     x_eval, ode_tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Integrate the system for a stack of lambda values.

    Returns (x, Y) with Y of shape (nx, S, B, m, m); S = 2 for (phi, phi1)
    or 4 with (zeta, zeta1) appended.
    """
    m = problem.m
    B = lams.size
    S = 4 if want_zeta else 2
    y0 = np.zeros((S, B, m, m), dtype=complex)
    y0[0] = problem.T1
    y0[1] = problem.T1p
    if want_zeta:
        y0[2] = -problem.T1p
        y0[3] = problem.T1
    sigma = problem.sigma
    lam_col = lams[:, None, None]

    def rhs(x, y):
        Y = y.reshape(S, B, m, m)
        s = sigma(x)
        s2 = s @ s
        out = np.empty_like(Y)
        out[0] = s @ Y[0] + Y[1]
        out[1] = -(s @ Y[1]) - s2 @ Y[0] - lam_col * Y[0]
        if want_zeta:
            out[2] = s @ Y[2] + Y[3]
            out[3] = -(s @ Y[3]) - s2 @ Y[2] - lam_col * Y[2]
        return out.ravel()

    t_eval = [np.pi] if x_eval is None else np.asarray(x_eval, dtype=float)
    sol = solve_ivp(rhs, (0.0, np.pi), y0.ravel(), method="DOP853",
                    rtol=ode_tol, atol=ode_tol, t_eval=t_eval)
    if sol.status != 0:
        raise IntegratorFailure(sol.message)
    Y = np.ascontiguousarray(sol.y.T).reshape(sol.t.size, S, B, m, m)
    return sol.t, Y


def _propagate(problem: ValidatedProblem, lams, want_zeta: bool = False,
               x_eval=None, ode_tol: float = 1e-10):
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    xs = None
    parts = []
    for start in range(0, lams.size, _CHUNK):
        xs, Y = _propagate_chunk(problem, lams[start:start + _CHUNK],
                                 want_zeta, x_eval, ode_tol)
        parts.append(Y)
    return xs, np.concatenate(parts, axis=2)


def _v2(problem: ValidatedProblem, Y: np.ndarray, Y1: np.ndarray) -> np.ndarray:
    """Right boundary form V2 applied to a solution given (Y(pi), Y1(pi))."""
    return problem.T2 @ (Y1 - problem.H2 @ Y) - problem.T2p @ Y


@dataclass
class FundamentalPair:
    """phi and zeta solutions sampled along x for a single lambda.

    phi normalizes the left boundary form to zero (phi(0) = T1,
    phi1(0) = T1p); zeta normalizes it to the identity (zeta(0) = -T1p,
    zeta1(0) = T1).
    """

    lam: complex
    x: np.ndarray
    phi: np.ndarray
    phi_q: np.ndarray
    zeta: np.ndarray
    zeta_q: np.ndarray


def integrate_fundamental(problem: ValidatedProblem, lam, x_eval=None,
                          ode_tol: float = 1e-10) -> FundamentalPair:
    """Integrate phi and zeta at one lambda, sampled on x_eval (default 201 uniform)."""
    if x_eval is None:
        x_eval = np.linspace(0.0, np.pi, 201)
    xs, Y = _propagate(problem, [lam], want_zeta=True, x_eval=x_eval, ode_tol=ode_tol)
    return FundamentalPair(lam=complex(lam), x=xs, phi=Y[:, 0, 0], phi_q=Y[:, 1, 0],
                           zeta=Y[:, 2, 0], zeta_q=Y[:, 3, 0])


def pairing_defect(pair: FundamentalPair) -> float:
    """Deviation of zeta^dag phi1 - zeta1^dag phi from its constant value -I.

    The form is conserved along x for real lambda; its size is a direct
    accuracy check on the integrator.
    """
    zh = pair.zeta.conj().transpose(0, 2, 1)
    zqh = pair.zeta_q.conj().transpose(0, 2, 1)
    form = zh @ pair.phi_q - zqh @ pair.phi
    eye = np.eye(pair.phi.shape[-1])
    return float(np.abs(form + eye).max())


def characteristic_many(problem: ValidatedProblem, lams,
                        ode_tol: float = 1e-10) -> np.ndarray:
    """Characteristic matrix V2(phi) for a stack of lambda values -> (B, m, m)."""
    _, Y = _propagate(problem, lams, want_zeta=False, ode_tol=ode_tol)
    return _v2(problem, Y[-1, 0], Y[-1, 1])


def characteristic_matrix(problem: ValidatedProblem, lam,
                          ode_tol: float = 1e-10) -> np.ndarray:
    """Characteristic matrix at a single lambda; eigenvalues are the zeros of its det."""
    return characteristic_many(problem, [lam], ode_tol)[0]


def weyl_many(problem: ValidatedProblem, lams, ode_tol: float = 1e-10):
    """Weyl matrices for a stack of lambdas; returns (M, svmin_of_char)."""
    _, Y = _propagate(problem, lams, want_zeta=True, ode_tol=ode_tol)
    delta = _v2(problem, Y[-1, 0], Y[-1, 1])
    v2zeta = _v2(problem, Y[-1, 2], Y[-1, 3])
    sv = np.linalg.svd(delta, compute_uv=False)
    M = -np.linalg.solve(delta, v2zeta)
    return M, sv[..., -1]


def weyl_matrix(problem: ValidatedProblem, lam, ode_tol: float = 1e-10,
                rank_tol: float = 1e-6) -> np.ndarray:
    """Weyl matrix M(lambda) = -Delta(lambda)^{-1} V2(zeta).

    M carries the full spectral content: it is meromorphic with simple poles
    exactly at the eigenvalues, and the weight matrices are its residues.
    Raises AtEigenvalue when the characteristic matrix is numerically singular.
    """
    _, Y = _propagate(problem, [lam], want_zeta=True, ode_tol=ode_tol)
    delta = _v2(problem, Y[-1, 0], Y[-1, 1])[0]
    sv = np.linalg.svd(delta, compute_uv=False)
    if sv[-1] < rank_tol * max(1.0, sv[0]):
        raise AtEigenvalue(f"characteristic matrix singular at lambda = {lam}")
    v2zeta = _v2(problem, Y[-1, 2], Y[-1, 3])[0]
    return -np.linalg.solve(delta, v2zeta)


# ---------------------------------------------------------------------------
# eigenvalue search


@dataclass
class EigenRecord:
    """One eigenvalue cluster: location, multiplicity, assigned index pairs."""

    lam: float
    multiplicity: int
    pairs: list[tuple[int, int]] = field(default_factory=list)
    svmin: float = 0.0


def _svmin_scan(problem: ValidatedProblem, lams: np.ndarray, ode_tol: float):
    """Smallest/largest singular values of the characteristic matrix on a grid."""
    sv = np.empty(lams.size)
    smax = 0.0
    for start in range(0, lams.size, _CHUNK):
        delta = characteristic_many(problem, lams[start:start + _CHUNK], ode_tol)
        s = np.linalg.svd(delta, compute_uv=False)
        sv[start:start + _CHUNK] = s[:, -1]
        smax = max(smax, float(s[:, 0].max()))
    return sv, smax


def _local_minima(vals: np.ndarray) -> np.ndarray:
    """Indices of one-sided local minima, including the endpoints."""
    n = vals.size
    if n < 2:
        return np.arange(n)
    keep = np.zeros(n, dtype=bool)
    keep[0] = vals[0] <= vals[1]
    keep[-1] = vals[-1] <= vals[-2]
    if n > 2:
        interior = (vals[1:-1] <= vals[:-2]) & (vals[1:-1] <= vals[2:])
        keep[1:-1] = interior
    return np.nonzero(keep)[0]


def _refine_minima(problem: ValidatedProblem, tgrid: np.ndarray, sv: np.ndarray,
                   sign: int, cfg: RunConfig):
    """Golden-section refinement of svmin dips; lambda = sign * t^2.

    All brackets iterate in lockstep so that each golden step costs a single
    batched integration.  Returns (t_refined, svmin_at_refined).
    """
    idx = _local_minima(sv)
    if idx.size == 0:
        return np.empty(0), np.empty(0)
    lo = tgrid[np.maximum(idx - 1, 0)].astype(float)
    hi = tgrid[np.minimum(idx + 1, tgrid.size - 1)].astype(float)

    def evaluate(ts: np.ndarray, tol: float | None = None) -> np.ndarray:
        lams = sign * ts.astype(complex) ** 2
        delta = characteristic_many(problem, lams, tol or cfg.ode_tol)
        return np.linalg.svd(delta, compute_uv=False)[:, -1]

    while (hi - lo).max() > cfg.root_tol:
        width = hi - lo
        c = hi - _INVPHI * width
        d = lo + _INVPHI * width
        fcd = evaluate(np.concatenate([c, d]))
        fc, fd = fcd[:c.size], fcd[c.size:]
        left = fc < fd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
    mid = 0.5 * (lo + hi)

    # The dip is a V in t whose tip is blurred by integration noise, so the
    # bracket stalls a few noise-widths from the true vertex.  A slope fit
    # from two samples taken clear of the noise floor relocates it.  The fit
    # error is noise/(2*slope) regardless of the sample offset, so these few
    # evaluations run at a tighter tolerance than the scan.
    fit_tol = 0.01 * cfg.ode_tol
    step = 1e-7 * (1.0 + mid)
    fpm = evaluate(np.concatenate([mid - step, mid + step]), fit_tol)
    fm, fp = fpm[:mid.size], fpm[mid.size:]
    ssum = fm + fp
    safe = ssum > 0.0
    shift = step * (fm - fp) / np.where(safe, ssum, 1.0)
    star = mid + np.clip(np.where(safe, shift, 0.0), -step, step)
    fboth = evaluate(np.concatenate([star, mid]), fit_tol)
    fstar, fmid = fboth[:mid.size], fboth[mid.size:]
    better = fstar < fmid
    return np.where(better, star, mid), np.where(better, fstar, fmid)


def _level_boundaries(rk: np.ndarray, n_max: int) -> np.ndarray:
    """rho-boundaries b_1..b_{n_max+1} separating asymptotic index levels."""
    half = 0.5 * (rk[0] + rk[-1] - 1.0)
    return np.array([n + half for n in range(1, n_max + 2)])


def find_eigenvalues(problem: ValidatedProblem, n_max: int,
                     config: RunConfig | None = None,
                     constants: ModelConstants | None = None) -> list[EigenRecord]:
    """All eigenvalues with index level <= n_max, with multiplicities and (n, k).

    Scans the smallest singular value of the characteristic matrix along
    rho in [0, b_{n_max+1}) and along the negative axis lambda = -tau^2 for
    tau up to 1 + 2 sup||sigma||, refines every dip, keeps dips whose
    singular value collapses, and assigns index pairs by counting eigenvalues
    between consecutive asymptotic level boundaries.
    """
    cfg = config or RunConfig()
    if constants is None:
        constants = build_model_constants(problem.T1, problem.T2)
    m = problem.m
    bounds = _level_boundaries(constants.rk, n_max)
    lam_top = bounds[-1] ** 2

    rho_grid = np.arange(0.0, bounds[-1] + 2 * cfg.scan_step, cfg.scan_step)
    tau_max = 1.0 + 2.0 * problem.sigma.sup_norm()
    tau_grid = np.arange(cfg.scan_step, tau_max + cfg.scan_step, cfg.scan_step)

    sv_r, smax_r = _svmin_scan(problem, rho_grid.astype(complex) ** 2, cfg.ode_tol)
    sv_t, smax_t = _svmin_scan(problem, -(tau_grid.astype(complex) ** 2), cfg.ode_tol)
    scale = max(smax_r, smax_t, 1e-300)
    accept = cfg.rank_tol * scale

    roots: list[tuple[float, float]] = []  # (lambda, svmin)
    for tgrid, sv, sign in ((rho_grid, sv_r, 1), (tau_grid, sv_t, -1)):
        t_ref, f_ref = _refine_minima(problem, tgrid, sv, sign, cfg)
        for t, fv in zip(t_ref, f_ref):
            if fv < accept:
                roots.append((float(sign * t * t), float(fv)))

    records = _cluster_and_assign(problem, roots, bounds, lam_top, constants,
                                  n_max, cfg, scale, allow_rescan=True)
    return records


def _cluster_and_assign(problem, roots, bounds, lam_top, constants, n_max,
                        cfg, scale, allow_rescan: bool) -> list[EigenRecord]:
    m = problem.m
    roots = sorted(roots)
    dedup: list[tuple[float, float]] = []
    for lam, fv in roots:
        if dedup and abs(lam - dedup[-1][0]) <= 1e3 * cfg.root_tol * (1.0 + abs(lam)):
            if fv < dedup[-1][1]:
                dedup[-1] = (lam, fv)
            continue
        dedup.append((lam, fv))

    clusters: list[list[tuple[float, float]]] = []
    for lam, fv in dedup:
        if clusters and abs(lam - clusters[-1][-1][0]) <= cfg.cluster_tol * (1.0 + abs(lam)):
            clusters[-1].append((lam, fv))
        else:
            clusters.append([(lam, fv)])

    centers = np.array([np.mean([lam for lam, _ in c]) for c in clusters])
    keep = centers < lam_top
    centers = centers[keep]
    svs = np.array([min(fv for _, fv in c) for c, k in zip(clusters, keep) if k])

    if centers.size:
        delta = characteristic_many(problem, centers.astype(complex), cfg.ode_tol)
        svals = np.linalg.svd(delta, compute_uv=False)
        mults = (svals < cfg.rank_tol * scale).sum(axis=1)
        mults = np.maximum(mults, 1)
    else:
        mults = np.zeros(0, dtype=int)

    records = [EigenRecord(lam=float(c), multiplicity=int(mu), svmin=float(sv))
               for c, mu, sv in zip(centers, mults, svs)]

    # occupancy per asymptotic level
    lam_bounds = bounds ** 2  # level n window: lam in [b_n^2, b_{n+1}^2), level 0 below b_1^2
    expected = [m - constants.p_perp] + [m] * n_max
    windows: list[list[EigenRecord]] = [[] for _ in range(n_max + 1)]
    for rec in records:
        if rec.lam < lam_bounds[0]:
            windows[0].append(rec)
        else:
            n = int(np.searchsorted(lam_bounds, rec.lam, side="right"))
            if n <= n_max:
                windows[n].append(rec)
    bad = [n for n in range(n_max + 1)
           if sum(r.multiplicity for r in windows[n]) != expected[n]]
    if bad:
        if allow_rescan:
            extra = _rescan_levels(problem, bad, bounds, constants, cfg)
            merged = {(round(l, 14), f) for l, f in roots} | set(extra)
            return _cluster_and_assign(problem, sorted(merged), bounds, lam_top,
                                       constants, n_max, cfg, scale,
                                       allow_rescan=False)
        counts = {n: sum(r.multiplicity for r in windows[n]) for n in bad}
        raise SlotMismatch(
            f"eigenvalue count per level disagrees with the index set at levels "
            f"{counts} (expected {m} per level, {m - constants.p_perp} at level 0)")

    for n, recs in enumerate(windows):
        ks = list(range(constants.p_perp + 1, m + 1)) if n == 0 else list(range(1, m + 1))
        pos = 0
        for rec in sorted(recs, key=lambda r: r.lam):
            rec.pairs.extend((n, ks[pos + i]) for i in range(rec.multiplicity))
            pos += rec.multiplicity
    return [r for w in windows for r in sorted(w, key=lambda rr: rr.lam)]


def _rescan_levels(problem, levels, bounds, constants, cfg):
    """Fine rescan of the rho-windows whose eigenvalue count came up wrong."""
    out = []
    fine = cfg.with_(scan_step=cfg.scan_step / 16.0)
    for n in levels:
        lo = 0.0 if n == 0 else bounds[n - 1]
        hi = bounds[n]
        grids = [(np.arange(max(lo, 0.0), hi + fine.scan_step, fine.scan_step), 1)]
        if n == 0:
            # level 0 also owns the negative axis
            tau_max = 1.0 + 2.0 * problem.sigma.sup_norm()
            grids.append((np.arange(fine.scan_step, tau_max + fine.scan_step,
                                    fine.scan_step), -1))
        for tgrid, sign in grids:
            sv, smax = _svmin_scan(problem, sign * tgrid.astype(complex) ** 2,
                                   cfg.ode_tol)
            t_ref, f_ref = _refine_minima(problem, tgrid, sv, sign, fine)
            out.extend((float(sign * t * t), float(fv))
                       for t, fv in zip(t_ref, f_ref)
                       if fv < cfg.rank_tol * max(smax, 1e-300))
    return out


# ---------------------------------------------------------------------------
# weight matrices


def _contour_nodes(centers: np.ndarray, radii: np.ndarray, P: int, offset: float):
    theta = 2.0 * np.pi * np.arange(P) / P + offset
    lams = centers[:, None] + radii[:, None] * np.exp(1j * theta)[None, :]
    return theta, lams


def _contour_pass(problem, centers, radii, P, offset, cfg, char_scale):
    """Trapezoid residue estimates (nc, m, m) from P nodes per contour."""
    theta, lams = _contour_nodes(centers, radii, P, offset)
    M, svmin = weyl_many(problem, lams.ravel(), ode_tol=cfg.ode_tol)
    svmin = svmin.reshape(lams.shape)
    if np.any(svmin < 1e-10 * char_scale):
        raise ContourThroughEigenvalue(
            "a contour node is numerically on an eigenvalue; adjust radii")
    M = M.reshape(lams.shape + M.shape[-2:])
    w = (radii[:, None] / P) * np.exp(1j * theta)[None, :]
    return np.einsum("cp,cpij->cij", w, M)


def weight_matrices(problem: ValidatedProblem, centers, radii,
                    config: RunConfig | None = None) -> tuple[np.ndarray, float]:
    """Residues of the Weyl matrix around the given centers.

    Starts from ``config.contour_points`` trapezoid nodes and doubles (up to
    three times) until successive estimates agree to 1e-9 relative to
    max(1, ||alpha||).  Returns (alphas, max_hermitian_defect); each alpha
    is Hermitized after convergence.
    """
    cfg = config or RunConfig()
    centers = np.asarray(centers, dtype=complex)
    radii = np.asarray(radii, dtype=float)
    char_scale = _char_scale(problem, centers, radii, cfg)
    P = cfg.contour_points
    est = _contour_pass(problem, centers, radii, P, 0.0, cfg, char_scale)
    active = np.arange(centers.size)
    for _ in range(3):
        offset = np.pi / P
        second = _contour_pass(problem, centers[active], radii[active], P, offset,
                               cfg, char_scale)
        refined = 0.5 * (est[active] + second)
        diff = np.abs(refined - est[active]).max(axis=(1, 2))
        norm = np.abs(refined).max(axis=(1, 2))
        est[active] = refined
        still = diff > 1e-9 * np.maximum(1.0, norm)
        active = active[still]
        P *= 2
        if active.size == 0:
            break
    else:
        raise NoConvergence(
            f"contour residues did not settle after node doubling (clusters "
            f"{active.tolist()})")
    defect = float(np.abs(est - est.conj().transpose(0, 2, 1)).max()) if est.size else 0.0
    est = 0.5 * (est + est.conj().transpose(0, 2, 1))
    return est, defect


def _char_scale(problem, centers, radii, cfg) -> float:
    """Reference scale of the characteristic matrix near the contours."""
    probe = centers + radii * 1j
    delta = characteristic_many(problem, probe, cfg.ode_tol)
    s = np.linalg.svd(delta, compute_uv=False)
    return float(max(s[:, 0].max(), 1e-300))


def weight_matrix(problem: ValidatedProblem, lam: float, neighbor_lams,
                  config: RunConfig | None = None) -> np.ndarray:
    """Weight matrix of one eigenvalue cluster centered at lam.

    The contour radius is half the distance to the nearest neighbor
    eigenvalue, capped at 1.
    """
    cfg = config or RunConfig()
    neighbors = [x for x in np.atleast_1d(neighbor_lams) if abs(x - lam) > 1e-12]
    gap = min((abs(x - lam) for x in neighbors), default=2.0)
    radius = min(0.5 * gap, 1.0)
    alphas, _ = weight_matrices(problem, [lam], [radius], cfg)
    return alphas[0]


def extract_spectral_data(problem: ValidatedProblem, n_max: int,
                          config: RunConfig | None = None,
                          constants: ModelConstants | None = None) -> SpectralDataSet:
    """Forward map: eigenvalues and weights for levels 0..n_max as a dataset.

    The dataset's shift is set to max(0, -min lambda) so downstream square
    roots are real.
    """
    cfg = config or RunConfig()
    if constants is None:
        constants = build_model_constants(problem.T1, problem.T2)
    records = find_eigenvalues(problem, n_max, cfg, constants)
    if not records:
        return SpectralDataSet.build(problem.m, [], shift=0.0)

    lams = np.array([r.lam for r in records])
    lam_top = _level_boundaries(constants.rk, n_max)[-1] ** 2
    radii = np.empty(lams.size)
    for i, lam in enumerate(lams):
        gaps = [abs(lam - other) for j, other in enumerate(lams) if j != i]
        gaps.append(0.9 * abs(lam_top - lam))
        radii[i] = min(0.5 * min(gaps), 1.0)
    alphas, _ = weight_matrices(problem, lams.astype(complex), radii, cfg)

    items = []
    for rec, alpha in zip(records, alphas):
        for (n, k) in rec.pairs:
            items.append((n, k, rec.lam, alpha))
    shift = max(0.0, -float(lams.min()))
    return SpectralDataSet.build(problem.m, items, shift=shift,
                                 cluster_tol=cfg.cluster_tol)
