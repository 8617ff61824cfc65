"""Zero-potential reference problem: boundary determinant roots, residue
projectors, closed-form solutions, model spectral data, and the overlap kernel.

Everything here concerns L0 = (sigma = 0, T1, T2, H2 = 0).  Its solutions are
elementary:

    phi0(x, lambda) = cos(rho x) T1 + (sin(rho x)/rho) T1p,   rho = sqrt(lambda),

and its spectral data follow from the matrix functions

    W0(rho) = (T2 T1 + T2p T1p) sin(pi rho) + (T2p T1 - T2 T1p) cos(pi rho),
    U0(rho) = (T2 T1 + T2p T1p) cos(pi rho) + (T2 T1p - T2p T1) sin(pi rho).

The eigenvalue layout is rho = n + r_k where r_1 <= ... <= r_m are the zeros
of det W0 on [0, 1) counted with multiplicity, and the weights are built from
the residue projectors A_k of W0^{-1} U0 at the distinct r_k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SpectralDataSet, kernel_intersection_dim, mat, sqrt_lambda
from .errors import RootCountMismatch, SingularContour

_GL_NODES = 96
_gl_x, _gl_w = np.polynomial.legendre.leggauss(_GL_NODES)
# (2k+1)! for k = 0..5
_ODD_FACT = np.array([1.0, 6.0, 120.0, 5040.0, 362880.0, 39916800.0])


def w0_matrix(T1, T2, rho):
    """W0 at rho (scalar or array); returns (..., m, m)."""
    T1 = mat(T1)
    T2 = mat(T2)
    m = T1.shape[0]
    T1p = np.eye(m) - T1
    T2p = np.eye(m) - T2
    rho = np.asarray(rho, dtype=complex)
    s = np.sin(np.pi * rho)[..., None, None]
    c = np.cos(np.pi * rho)[..., None, None]
    return (T2 @ T1 + T2p @ T1p) * s + (T2p @ T1 - T2 @ T1p) * c


def u0_matrix(T1, T2, rho):
    """U0 at rho (scalar or array); returns (..., m, m)."""
    T1 = mat(T1)
    T2 = mat(T2)
    m = T1.shape[0]
    T1p = np.eye(m) - T1
    T2p = np.eye(m) - T2
    rho = np.asarray(rho, dtype=complex)
    s = np.sin(np.pi * rho)[..., None, None]
    c = np.cos(np.pi * rho)[..., None, None]
    return (T2 @ T1 + T2p @ T1p) * c + (T2 @ T1p - T2p @ T1) * s


def _w0_prime(T1, T2, rho):
    T1 = mat(T1)
    T2 = mat(T2)
    m = T1.shape[0]
    T1p = np.eye(m) - T1
    T2p = np.eye(m) - T2
    rho = np.asarray(rho, dtype=complex)
    s = np.sin(np.pi * rho)[..., None, None]
    c = np.cos(np.pi * rho)[..., None, None]
    return np.pi * ((T2 @ T1 + T2p @ T1p) * c - (T2p @ T1 - T2 @ T1p) * s)


def _golden_min(f, a: float, b: float, tol: float = 1e-13) -> float:
    """Golden-section minimizer of a scalar function on [a, b]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _winding_and_centroid(T1, T2, center: float, radius: float,
                          nodes: int = 512) -> tuple[int, complex]:
    """Zero count (winding number of det W0) and first moment inside a circle.

    The moment integral (2 pi i)^{-1} \\oint rho tr(W0^{-1} W0') drho equals the
    sum of the enclosed zeros with multiplicity, so centroid = moment / count.
    Raises SingularContour if the contour grazes a zero.
    """
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    z = center + radius * np.exp(1j * theta)
    W = w0_matrix(T1, T2, z)
    det = np.linalg.det(W)
    scale = np.abs(det).max()
    if scale == 0.0 or np.abs(det).min() < 1e-13 * scale:
        raise SingularContour(
            f"det W0 vanishes on the circle |rho - {center:.6g}| = {radius:.3g}")
    dphase = np.angle(det[np.r_[1:nodes, 0]] / det)
    winding = int(np.rint(dphase.sum() / (2.0 * np.pi)))
    if winding <= 0:
        return winding, 0.0 + 0.0j
    Wp = _w0_prime(T1, T2, z)
    logderiv = np.trace(np.linalg.solve(W, Wp), axis1=-2, axis2=-1)
    drho = 1j * radius * np.exp(1j * theta)
    # (2 pi i)^{-1} trapezoid of rho * dlog(det W0): mean over nodes / i
    moment = (z * logderiv * drho).mean() / 1j
    return winding, moment / winding


def _circ_dist(a: float, b: float) -> float:
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


def compute_rk(T1, T2, samples: int = 2048) -> np.ndarray:
    """Zeros of det W0 on [0, 1), sorted ascending with multiplicity.

    Dense sampling of |det W0| locates candidate minima; each is refined by
    golden section, then a small circle in the complex rho-plane supplies the
    multiplicity (argument principle) and a spectrally accurate location (the
    first-moment integral).  The multiplicities must total m.
    """
    T1 = mat(T1)
    T2 = mat(T2)
    m = T1.shape[0]
    grid = np.arange(samples) / samples
    vals = np.abs(np.linalg.det(w0_matrix(T1, T2, grid)))
    scale = vals.max()
    if scale == 0.0:
        raise RootCountMismatch("det W0 vanishes identically on the sample grid")

    prev = np.roll(vals, 1)
    nxt = np.roll(vals, -1)
    cand_idx = np.nonzero((vals <= prev) & (vals <= nxt))[0]

    h = 1.0 / samples
    f = lambda r: float(np.abs(np.linalg.det(w0_matrix(T1, T2, r))))
    refined = []
    for i in cand_idx:
        r0 = grid[i]
        r = _golden_min(f, r0 - h, r0 + h)
        refined.append(r % 1.0)

    # dedupe candidates that collapsed onto the same zero
    refined.sort()
    merged: list[float] = []
    for r in refined:
        if merged and _circ_dist(r, merged[-1]) < 2.0 * h:
            continue
        merged.append(r)
    if len(merged) > 1 and _circ_dist(merged[0], merged[-1]) < 2.0 * h:
        merged.pop()

    roots: list[tuple[float, int]] = []
    for r in merged:
        gap = min((_circ_dist(r, s) for s in merged if s != r), default=1.0)
        radius = min(0.35 * gap, 0.05)
        radius = max(radius, 4.0 * h)
        for attempt in range(4):
            try:
                mult, centroid = _winding_and_centroid(T1, T2, r, radius)
                break
            except SingularContour:
                radius *= 1.37
        else:
            raise SingularContour(f"could not place a clean circle around rho = {r:.6g}")
        if mult <= 0:
            continue
        loc = float(centroid.real) % 1.0
        if loc > 1.0 - 1e-9:
            loc -= 1.0
        if abs(loc) < 1e-12:
            loc = 0.0
        roots.append((loc, mult))

    total = sum(mult for _, mult in roots)
    if total != m:
        raise RootCountMismatch(
            f"found {total} zeros of det W0 on [0,1) with multiplicity, expected {m}: "
            f"{roots}")
    out: list[float] = []
    for loc, mult in sorted(roots):
        out.extend([loc] * mult)
    return np.array(out)


def distinct_roots(rk: np.ndarray, tol: float = 1e-10):
    """Representatives calJ (1-based k), classes Jk, and the minimal circular gap."""
    rk = np.asarray(rk, dtype=float)
    cal_j: list[int] = []
    classes: dict[int, list[int]] = {}
    for k in range(1, rk.size + 1):
        if k == 1 or abs(rk[k - 1] - rk[k - 2]) > tol:
            cal_j.append(k)
            classes[k] = [k]
        else:
            classes[cal_j[-1]].append(k)
    if len(cal_j) < 2:
        gap = 1.0
    else:
        reps = [rk[k - 1] for k in cal_j]
        gap = min(_circ_dist(a, b) for i, a in enumerate(reps) for b in reps[:i])
    return cal_j, classes, gap


def compute_Ak(T1, T2, rk, contour_points: int = 64):
    """Residue projectors pi * Res W0^{-1} U0 at each distinct root.

    Returns a dict {representative k: A_k}.  Each A_k is computed as the
    trapezoid approximation of (1/2i) \\oint W0^{-1} U0 drho over a circle of
    radius min(gap/4, 0.1) around r_k; the circle is grown once if it grazes
    a singular point.
    """
    T1 = mat(T1)
    T2 = mat(T2)
    rk = np.asarray(rk, dtype=float)
    cal_j, classes, gap = distinct_roots(rk)
    out: dict[int, np.ndarray] = {}
    for k in cal_j:
        r = rk[k - 1]
        radius = min(0.25 * gap, 0.1)
        for attempt in range(2):
            theta = 2.0 * np.pi * (np.arange(contour_points) + 0.5) / contour_points
            z = r + radius * np.exp(1j * theta)
            W = w0_matrix(T1, T2, z)
            sv_min = np.linalg.svd(W, compute_uv=False)[..., -1]
            if sv_min.min() < 1e-12 * max(1.0, sv_min.max()):
                radius *= 1.31
                continue
            U = u0_matrix(T1, T2, z)
            integrand = np.linalg.solve(W, U)
            weights = radius * np.exp(1j * theta) * (np.pi / contour_points)
            out[k] = np.tensordot(weights, integrand, axes=(0, 0))
            break
        else:
            raise SingularContour(f"residue contour at r = {r:.6g} kept hitting zeros")
    return out


@dataclass
class ModelConstants:
    """Boundary-derived quantities shared by the model data and the inverse solver."""

    m: int
    T1: np.ndarray
    T2: np.ndarray
    T1p: np.ndarray
    T2p: np.ndarray
    p_perp: int
    rk: np.ndarray
    Ak: dict[int, np.ndarray]
    calJ: list[int]
    Jk: dict[int, list[int]]
    gap: float

    def rep_of(self, k: int) -> int:
        """Representative index whose class contains k."""
        for rep, members in self.Jk.items():
            if k in members:
                return rep
        raise KeyError(k)


def build_model_constants(T1, T2, samples: int = 2048,
                          contour_points: int = 64) -> ModelConstants:
    T1 = mat(T1)
    T2 = mat(T2)
    m = T1.shape[0]
    rk = compute_rk(T1, T2, samples=samples)
    cal_j, classes, gap = distinct_roots(rk)
    ak = compute_Ak(T1, T2, rk, contour_points=contour_points)
    return ModelConstants(
        m=m,
        T1=T1,
        T2=T2,
        T1p=np.eye(m) - T1,
        T2p=np.eye(m) - T2,
        p_perp=kernel_intersection_dim(T1, T2),
        rk=rk,
        Ak=ak,
        calJ=cal_j,
        Jk=classes,
        gap=gap,
    )


# ---------------------------------------------------------------------------
# closed-form solutions


def model_phi(x, lam, T1):
    """phi0(x, lambda) = cos(rho x) T1 + (sin(rho x)/rho) T1p.

    x and lam may be scalars or broadcast-compatible arrays; the result has
    shape broadcast(x, lam) + (m, m).
    """
    T1 = mat(T1)
    m = T1.shape[0]
    T1p = np.eye(m) - T1
    rho = sqrt_lambda(lam)
    x = np.asarray(x, dtype=float)
    c = np.cos(rho * x)
    s = x * np.sinc(rho * x / np.pi)  # sin(rho x)/rho, exact at rho = 0
    return c[..., None, None] * T1 + s[..., None, None] * T1p


def model_phi_q(x, lam, T1):
    """Quasi-derivative of phi0 (its plain derivative, since sigma = 0)."""
    T1 = mat(T1)
    m = T1.shape[0]
    T1p = np.eye(m) - T1
    rho = sqrt_lambda(lam)
    x = np.asarray(x, dtype=float)
    c = np.cos(rho * x)
    # -rho sin(rho x) = -lam * sin(rho x)/rho
    s = -np.asarray(lam, dtype=complex) * x * np.sinc(rho * x / np.pi)
    return s[..., None, None] * T1 + c[..., None, None] * T1p


def model_spectral_data(constants: ModelConstants, n_max: int) -> SpectralDataSet:
    """Model eigenvalues (n + r_k)^2 and weights for levels 0..n_max.

    The weight at rho = n + r_k is (2/pi)(T1 + rho T1p) A_k (T1 + rho T1p)
    for rho > 0, and (1/pi) T1 A_k T1 at rho = 0; every member of a
    multiplicity class carries the class's full weight.
    """
    T1, T1p = constants.T1, constants.T1p
    items = []
    for n in range(0, n_max + 1):
        for k in range(1, constants.m + 1):
            if n == 0 and k <= constants.p_perp:
                continue
            rho = n + constants.rk[k - 1]
            A = constants.Ak[constants.rep_of(k)]
            if rho > 0.0:
                F = T1 + rho * T1p
                alpha = (2.0 / np.pi) * (F @ A @ F)
            else:
                alpha = (1.0 / np.pi) * (T1 @ A @ T1)
            items.append((n, k, rho * rho, alpha))
    return SpectralDataSet.build(constants.m, items, shift=0.0)


# ---------------------------------------------------------------------------
# overlap kernel


def _sinint_powers(a, x: float):
    """J_n(a, x) = int_0^x t^n sin(a t)/a dt for n = 1, 3, ..., 11.

    Gauss-Legendre quadrature on [0, x]; the integrand t^n * (t sinc(a t/pi))
    is evaluated stably for any a, including a = 0.  Returns shape
    (6,) + a.shape.
    """
    a = np.asarray(a, dtype=complex)
    t = 0.5 * x * (_gl_x + 1.0)
    w = 0.5 * x * _gl_w
    ssc = t * np.sinc(np.multiply.outer(a, t) / np.pi)  # sin(a t)/a
    powers = t ** np.arange(1, 12, 2)[:, None]  # (6, nodes)
    return np.einsum("j,nj,...j->n...", w, powers, ssc)


def overlap_coeffs(x: float, rho_a, rho_b):
    """Scalar kernels (Ic, Is) of the solution-product integral.

    Ic = int_0^x cos(a t) cos(b t) dt and
    Is = int_0^x (sin(a t)/a)(sin(b t)/b) dt,
    evaluated stably for coincident and near-zero arguments.  rho_a, rho_b
    broadcast; x is a scalar >= 0.
    """
    a = np.asarray(rho_a, dtype=complex)
    b = np.asarray(rho_b, dtype=complex)
    a, b = np.broadcast_arrays(a, b)
    x = float(x)

    def S(u):
        return x * np.sinc(u * x / np.pi)  # sin(u x)/u

    s_diff = S(a - b)
    s_sum = S(a + b)
    Ic = 0.5 * (s_diff + s_sum)

    prod = a * b
    small = np.abs(prod) < 1e-3
    with np.errstate(divide="ignore", invalid="ignore"):
        Is = np.where(small, 0.0, 0.5 * (s_diff - s_sum)) / np.where(small, 1.0, prod)

    if np.any(small):
        aa = np.where(np.abs(a) >= np.abs(b), a, b)[small]
        bb = np.where(np.abs(a) >= np.abs(b), b, a)[small]
        J = _sinint_powers(aa, x)  # (6, nsmall)
        k = np.arange(6)
        signs = (-1.0) ** k
        bpow = bb[None, :] ** (2 * k[:, None])
        series = np.einsum("n,n,nj->j", signs, 1.0 / _ODD_FACT, bpow * J)
        Is = np.asarray(Is, dtype=complex)
        Is[small] = series
    return Ic, Is


def model_D(x: float, lam, mu, T1):
    """Overlap kernel int_0^x phi0(t, lambda) phi0(t, mu) dt.

    Equals the boundary form [phi0(x,lambda) phi0q(x,mu) -
    phi0q(x,lambda) phi0(x,mu)] / (lambda - mu) for lambda != mu.  lam and mu
    broadcast; the result has shape broadcast(lam, mu) + (m, m).
    """
    T1 = mat(T1)
    m = T1.shape[0]
    T1p = np.eye(m) - T1
    Ic, Is = overlap_coeffs(x, sqrt_lambda(lam), sqrt_lambda(mu))
    Ic = np.asarray(Ic, dtype=complex)
    Is = np.asarray(Is, dtype=complex)
    return Ic[..., None, None] * T1 + Is[..., None, None] * T1p


def model_weyl(T1, T2, lam):
    """Weyl matrix of the zero-potential operator, in closed form.

    Both boundary solutions are elementary when sigma = 0 and H2 = 0, so
    M0(lambda) needs no integration.  lam broadcasts; result has shape
    lam.shape + (m, m).
    """
    T1 = mat(T1)
    T2 = mat(T2)
    m = T1.shape[0]
    eye = np.eye(m)
    T1p = eye - T1
    T2p = eye - T2
    lam = np.asarray(lam, dtype=complex)
    rho = sqrt_lambda(lam)
    x = np.pi
    cos = np.cos(rho * x)[..., None, None]
    xsinc = (x * np.sinc(rho * x / np.pi))[..., None, None]  # sin(rho x)/rho
    lam_c = lam[..., None, None]
    phi = cos * T1 + xsinc * T1p
    phi_q = -lam_c * xsinc * T1 + cos * T1p
    zeta = xsinc * T1 - cos * T1p
    zeta_q = cos * T1 + lam_c * xsinc * T1p
    delta = T2 @ phi_q - T2p @ phi
    v2zeta = T2 @ zeta_q - T2p @ zeta
    return -np.linalg.solve(delta, v2zeta)


def bg_norm(rhos, values) -> float:
    """Group-space norm: max of value norms and of divided-difference norms.

    For a matrix-valued function f on a finite point set,
    ||f|| = max(max_rho ||f(rho)||, max_{rho != theta} ||f(rho)-f(theta)|| / |rho-theta|).
    """
    rhos = np.asarray(rhos, dtype=float)
    vals = [mat(v) for v in values]
    best = max((float(np.linalg.norm(v, 2)) for v in vals), default=0.0)
    for i in range(len(vals)):
        for j in range(i):
            dr = abs(rhos[i] - rhos[j])
            if dr > 1e-14:
                best = max(best, float(np.linalg.norm(vals[i] - vals[j], 2)) / dr)
    return best
