"""Inverse solver: reconstruction from eigenvalues and weight matrices.

The measured data for levels up to a truncation N is interleaved with the
zero-potential model data into a finite family of "members".  Evaluating the
fundamental interpolation identity at every member's lambda turns it into a
block-linear system per grid point x; its solution yields the boundary
solutions of the unknown operator at the member lambdas, from which sigma,
the right boundary matrix, and the gauge correction are assembled in closed
form.

All lambdas here live in shifted coordinates (lambda + shift >= 0).  The
top-level driver applies the shift on entry and undoes it on exit:
sigma gains -shift*x*I and H2 gains +shift*pi*T2 when mapping the shifted
reconstruction back.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import lu_factor, lu_solve
from scipy.linalg.lapack import zgecon

from .core import (
    RunConfig,
    SigmaFunction,
    SpectralDataSet,
    auto_shift,
    herm,
    mat,
    shift_spectrum,
)
from .errors import IllConditioned, IndexSetMismatch, NoValidN0
from .model import (
    ModelConstants,
    build_model_constants,
    model_spectral_data,
    model_weyl,
    overlap_coeffs,
)

_TIE_RTOL = 1e-12
_COND_LIMIT = 1e12


@dataclass
class Member:
    """One interpolation node: an index pair with either measured or model data."""

    n: int
    k: int
    j: int               # 0 = measured, 1 = model
    lam: float           # shifted lambda
    rho: float
    alpha_prime: np.ndarray
    group: int = -1


def hybrid_data(data: SpectralDataSet, model_data: SpectralDataSet,
                N: int) -> list[Member]:
    """Interleave measured and model pairs for levels 0..N.

    Every index pair of the model up to level N must be present in the data
    (and vice versa); a mismatch means the data does not belong to the
    boundary geometry and raises IndexSetMismatch.
    """
    want = sorted((e.n, e.k) for e in model_data.entries if e.n <= N)
    have = sorted((e.n, e.k) for e in data.entries if e.n <= N)
    if want != have:
        missing = sorted(set(want) - set(have))
        extra = sorted(set(have) - set(want))
        raise IndexSetMismatch(
            f"data index pairs disagree with the boundary geometry up to "
            f"level {N}: missing {missing}, unexpected {extra}")
    members = []
    for e in sorted(data.entries, key=lambda e: (e.n, e.k)):
        if e.n > N:
            continue
        em = model_data.get(e.n, e.k)
        members.append(Member(e.n, e.k, 0, e.lam + data.shift, e.rho,
                              e.alpha_prime))
        members.append(Member(em.n, em.k, 1, em.lam + model_data.shift,
                              em.rho, em.alpha_prime))
    return members


@dataclass
class EigenGrouping:
    """Partition of the members into a head group and per-level tail groups."""

    n0: int
    N: int
    groups: list[list[int]]
    labels: list[str]

    @property
    def count(self) -> int:
        return len(self.groups)


def _grouping_valid(members: list[Member], constants: ModelConstants,
                    N: int, n0: int) -> bool:
    gap = constants.gap
    for mem in members:
        if mem.j == 0 and n0 < mem.n <= N:
            slot = mem.n + constants.rk[mem.k - 1]
            if abs(mem.rho - slot) >= gap / 4.0:
                return False
    head = [mem.rho for mem in members if mem.n <= n0]
    tail = [mem.rho for mem in members if mem.n > n0]
    if head and tail and max(head) >= min(tail):
        return False
    return True


def group_eigenvalues(members: list[Member], constants: ModelConstants,
                      N: int, n0: int | None = None) -> EigenGrouping:
    """Choose n0 and build the group partition.

    The head group holds every member with level <= n0; each tail level
    splits into one group per distinct model root class.  When n0 is not
    supplied, the smallest workable value is selected: every tail rho must
    sit within a quarter root-gap of its slot n + r_k, and the head interval
    must lie strictly below all tail groups.
    """
    if n0 is None:
        for cand in range(1, N + 1):
            if _grouping_valid(members, constants, N, cand):
                n0 = cand
                break
        else:
            raise NoValidN0(
                f"no grouping level n0 <= N = {N} separates the data; the "
                f"eigenvalues stray too far from their model slots")
    else:
        if not (1 <= n0 <= N) or not _grouping_valid(members, constants, N, n0):
            raise NoValidN0(f"requested n0 = {n0} does not give a valid grouping")

    groups = [[i for i, mem in enumerate(members) if mem.n <= n0]]
    labels = [f"head n<={n0}"]
    for n in range(n0 + 1, N + 1):
        for rep in constants.calJ:
            ks = set(constants.Jk[rep])
            idx = [i for i, mem in enumerate(members)
                   if mem.n == n and mem.k in ks]
            if idx:
                groups.append(idx)
                labels.append(f"level {n} r={constants.rk[rep - 1]:.6g}")
    for g, idx in enumerate(groups):
        for i in idx:
            members[i].group = g
    return EigenGrouping(n0=n0, N=N, groups=groups, labels=labels)


class MainSystem:
    """Finite member system of the interpolation identity, ready to solve per x.

    Within each group, members whose rho coincide have their coefficient
    rows summed onto the first member of the tie class (the unknown is the
    same matrix function evaluated at the same point, so the collapse is
    exact); the remaining tie members keep identity rows only.
    """

    def __init__(self, members: list[Member], grouping: EigenGrouping, T1):
        self.members = members
        self.grouping = grouping
        self.T1 = mat(T1)
        self.m = self.T1.shape[0]
        m = self.m
        self.T1p = np.eye(m) - self.T1
        K = len(members)
        self.K = K
        self.rhos = np.array([mem.rho for mem in members])
        self.lams = np.array([mem.lam for mem in members])
        self.signs = np.array([(-1.0) ** mem.j for mem in members])
        self.col_scale = np.where(self.rhos > 0.0, self.rhos, 1.0)

        tinv = (self.T1[None] +
                (1.0 / self.col_scale)[:, None, None] * self.T1p[None])
        alpha = np.stack([mem.alpha_prime for mem in members])
        w_row = self.signs[:, None, None] * (tinv @ alpha)
        self.W_rec = w_row @ tinv

        w_collapsed = w_row.copy()
        self.tie_rep = np.arange(K)
        for idx in grouping.groups:
            order = sorted(idx, key=lambda i: self.rhos[i])
            start = 0
            while start < len(order):
                stop = start + 1
                while (stop < len(order) and
                       abs(self.rhos[order[stop]] - self.rhos[order[start]])
                       <= _TIE_RTOL * (1.0 + abs(self.rhos[order[start]]))):
                    stop += 1
                tie = order[start:stop]
                rep = tie[0]
                if len(tie) > 1:
                    w_collapsed[rep] = w_row[tie].sum(axis=0)
                    for i in tie[1:]:
                        w_collapsed[i] = 0.0
                        self.tie_rep[i] = rep
                start = stop
        self.P = w_collapsed @ self.T1
        self.Q = w_collapsed @ self.T1p

    def coefficient_matrix(self, x: float) -> np.ndarray:
        """Km x Km matrix I + B(x) of the member system at one grid point."""
        Ic, Is = overlap_coeffs(x, self.rhos[:, None], self.rhos[None, :])
        B = (np.einsum("ab,aij->aibj", Ic, self.P)
             + np.einsum("ab,b,aij->aibj", Is, self.col_scale, self.Q))
        Km = self.K * self.m
        G = B.reshape(Km, Km)
        G[np.diag_indices(Km)] += 1.0
        return G

    def model_columns(self, x: float) -> np.ndarray:
        """Rescaled zero-potential solutions phi0(x, lam_b) T_b -> (K, m, m)."""
        arg = self.rhos * x
        cos = np.cos(arg)[:, None, None]
        sin = (x * np.sinc(arg / np.pi) * self.col_scale)[:, None, None]
        return cos * self.T1[None] + sin * self.T1p[None]

    def solve_at(self, x: float, cond_limit: float = _COND_LIMIT):
        """Solve for the rescaled unknown solutions at one x.

        Returns (phis, cond, residual): phis[b] is the reconstructed
        phi(x, lam_b) (unscaled), cond the 1-norm condition estimate, and
        residual the max-abs defect of the solved linear system.
        """
        G = self.coefficient_matrix(x)
        A = np.ascontiguousarray(G.T)
        rhs = self.model_columns(x).transpose(0, 2, 1).reshape(self.K * self.m,
                                                               self.m)
        lu, piv = lu_factor(A)
        anorm = np.linalg.norm(A, 1)
        rcond, info = zgecon(lu, anorm)
        cond = 1.0 / max(float(rcond), 1e-300)
        if cond > cond_limit:
            raise IllConditioned(
                f"main system condition {cond:.3e} exceeds {cond_limit:.1e} "
                f"at x = {x:.6f}")
        X = lu_solve((lu, piv), rhs)
        residual = float(np.abs(A @ X - rhs).max())
        checked = X.reshape(self.K, self.m, self.m).transpose(0, 2, 1)
        tinv = (self.T1[None] +
                (1.0 / self.col_scale)[:, None, None] * self.T1p[None])
        return checked @ tinv, cond, residual

    def coefficient_group_norm(self, x: float) -> float:
        """Group-block norm of B(x): max over row groups of the sum over
        column groups of the spectral norm of the block."""
        G = self.coefficient_matrix(x)
        Km = self.K * self.m
        G[np.diag_indices(Km)] -= 1.0
        B = G.reshape(self.K, self.m, self.K, self.m)
        best = 0.0
        for rows in self.grouping.groups:
            total = 0.0
            for cols in self.grouping.groups:
                block = B[np.ix_(rows, range(self.m), cols, range(self.m))]
                nr, _, nc, _ = block.shape
                flat = block.reshape(nr * self.m, nc * self.m)
                total += float(np.linalg.norm(flat, 2))
            best = max(best, total)
        return best


def assemble_main_system(members: list[Member], grouping: EigenGrouping,
                         T1) -> MainSystem:
    """Build the per-x solvable member system (see MainSystem)."""
    return MainSystem(members, grouping, T1)


def solve_main_equation(system: MainSystem, x: float,
                        cond_limit: float = _COND_LIMIT):
    """Solve the member system at one x; see MainSystem.solve_at."""
    return system.solve_at(x, cond_limit)


def alpha_hat(system: MainSystem, group: int) -> np.ndarray:
    """Signed, rescale-conjugated weight sum of one group.

    Zero exactly when the group's measured weights match the model's.
    """
    idx = system.grouping.groups[group]
    return system.W_rec[idx].sum(axis=0)


def xi_values(system: MainSystem) -> dict[int, float]:
    """Per-level deviation functionals xi_n over the tail groups.

    Each tail group contributes the sum of |rho_a - rho_b| over its unordered
    member pairs plus the spectral norm of its signed weight sum; groups of
    the same level add up.  Zero for pure model data.
    """
    out: dict[int, float] = {}
    for g, idx in enumerate(system.grouping.groups):
        if g == 0:
            continue
        level = system.members[idx[0]].n
        rho = system.rhos[idx]
        pair_sum = 0.0
        for i in range(len(idx)):
            for j in range(i):
                pair_sum += abs(rho[i] - rho[j])
        val = pair_sum + float(np.linalg.norm(alpha_hat(system, g), 2))
        out[level] = out.get(level, 0.0) + val
    return out


def xi_total(xi: dict[int, float]) -> float:
    """l2 aggregate of the per-level deviations."""
    return float(np.sqrt(sum(v * v for v in xi.values())))


@dataclass
class ReconstructionResult:
    """Output of the reconstruction driver.

    sigma_star/H2_star are in the original (unshifted) coordinates;
    the _shifted twins describe the shifted operator the algorithm actually
    solved for, whose eigenvalues are lambda + shift.  C is the gauge block
    separating (sigma, H2) representatives of the same data.

    The returned pair is normalized so that its forward Weyl matrix equals
    the partial-fraction form produced by modified_weyl, with no constant
    offset.  The representative produced by the bare averaging formulas is
    (sigma_star + C, H2_star - T2 C T2); both describe the same data, and
    compare_modulo_gauge treats them as equal.
    """

    x: np.ndarray
    sigma_star: np.ndarray
    H2_star: np.ndarray
    sigma_star_shifted: np.ndarray
    H2_star_shifted: np.ndarray
    C: np.ndarray
    shift: float
    N: int
    grouping: EigenGrouping
    system: MainSystem
    diagnostics: dict = field(default_factory=dict)

    def sigma_function(self, shifted: bool = False) -> SigmaFunction:
        """Cubic-spline interpolant of the reconstructed sigma as a callable."""
        vals = self.sigma_star_shifted if shifted else self.sigma_star
        spline = CubicSpline(self.x, vals, axis=0)
        m = vals.shape[-1]
        return SigmaFunction.wrap(lambda t: spline(t), m)

    def evaluate_shifted(self, x: float) -> np.ndarray:
        """Solve the member system at an arbitrary x and return sigma*(x)
        of the shifted operator (exact, no interpolation)."""
        sys_ = self.system
        phis, _, _ = sys_.solve_at(float(x))
        term = _reconstruction_term(sys_, phis, float(x))
        Chat = sys_.W_rec.sum(axis=0)
        dc = sys_.T1 @ Chat @ sys_.T1 + sys_.T1p @ Chat @ sys_.T1p
        return herm(-2.0 * term + dc - self.C)

    def evaluate(self, x: float) -> np.ndarray:
        eye = np.eye(self.sigma_star.shape[-1])
        return self.evaluate_shifted(x) - self.shift * float(x) * eye


def _reconstruction_term(system: MainSystem, phis: np.ndarray,
                         x: float) -> np.ndarray:
    """sum_a [phi(x, lam_a) T_a] W_a [phi0(x, lam_a) T_a] over the members.

    Both factors around W_a carry the member normalizer T_a; without it the
    sine-channel terms lose their rho_a^2 scale and no longer balance the
    weight-sum compensator.
    """
    scaled = system.model_columns(x)
    T = (system.T1[None] +
         system.col_scale[:, None, None] * system.T1p[None])
    return np.einsum("aij,ajk,akl,alm->im", phis, T, system.W_rec, scaled)


def modified_weyl(system: MainSystem, T1, T2, lam) -> np.ndarray:
    """Model Weyl matrix plus the signed member poles, in shifted coordinates.

    For the exact solution of the member system this equals the Weyl matrix
    of the reconstructed (shifted) operator.
    """
    lam = np.asarray(lam, dtype=complex)
    M = model_weyl(T1, T2, lam)
    denom = lam[..., None] - system.lams  # (..., K)
    pole = np.einsum("...a,a,aij->...ij", 1.0 / denom, system.signs,
                     np.stack([mem.alpha_prime for mem in system.members]))
    return M + pole


def run_algorithm1(T1, T2, data: SpectralDataSet,
                   config: RunConfig | None = None,
                   constants: ModelConstants | None = None) -> ReconstructionResult:
    """Full reconstruction driver.

    Shifts the data, builds the model constants and model data, forms the
    hybrid member family and its grouping, solves the member system on the
    x grid, and assembles sigma*, H2*, and the gauge block C.  The returned
    sigma_star/H2_star are mapped back to unshifted coordinates.
    """
    cfg = config or RunConfig()
    T1 = mat(T1)
    T2 = mat(T2)
    m = T1.shape[0]
    eye = np.eye(m)
    if constants is None:
        constants = build_model_constants(T1, T2)

    shift = auto_shift(data) if cfg.shift is None else float(cfg.shift)
    data_sh = shift_spectrum(data, shift, cluster_tol=cfg.cluster_tol)
    model_data = model_spectral_data(constants, cfg.N)
    members = hybrid_data(data_sh, model_data, cfg.N)
    grouping = group_eigenvalues(members, constants, cfg.N, n0=cfg.n0)
    system = assemble_main_system(members, grouping, T1)

    xs = np.linspace(0.0, np.pi, cfg.grid)
    Chat = system.W_rec.sum(axis=0)
    dc = T1 @ Chat @ T1 + system.T1p @ Chat @ system.T1p
    C = system.T1p @ Chat @ system.T1p

    sigma_sh = np.empty((xs.size, m, m), dtype=complex)
    max_cond = 0.0
    max_res = 0.0
    term_pi = None
    for i, x in enumerate(xs):
        phis, cond, res = system.solve_at(x)
        term = _reconstruction_term(system, phis, x)
        sigma_sh[i] = -2.0 * term + dc - C
        max_cond = max(max_cond, cond)
        max_res = max(max_res, res)
        if i == xs.size - 1:
            term_pi = term

    H2_sh = T2 @ (term_pi - dc) @ T2 + T2 @ C @ T2

    herm_defect = float(np.abs(sigma_sh - sigma_sh.conj().transpose(0, 2, 1)).max())
    sigma_sh = 0.5 * (sigma_sh + sigma_sh.conj().transpose(0, 2, 1))
    h2_defect = float(np.abs(H2_sh - H2_sh.conj().T).max())
    H2_sh = herm(H2_sh)

    sigma_true = sigma_sh - shift * xs[:, None, None] * eye
    H2_true = H2_sh + shift * np.pi * T2

    xi = xi_values(system)
    diagnostics = {
        "max_cond": max_cond,
        "max_residual": max_res,
        "herm_defect_sigma": herm_defect,
        "herm_defect_H2": h2_defect,
        "xi": xi,
        "Xi": xi_total(xi),
        "group_norm_at_pi": system.coefficient_group_norm(np.pi),
        "n0": grouping.n0,
        "group_count": grouping.count,
    }
    return ReconstructionResult(
        x=xs, sigma_star=sigma_true, H2_star=H2_true,
        sigma_star_shifted=sigma_sh, H2_star_shifted=H2_sh, C=herm(C),
        shift=shift, N=cfg.N, grouping=grouping, system=system,
        diagnostics=diagnostics)
