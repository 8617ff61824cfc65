"""Problem containers, validation, index bookkeeping, spectral datasets, gauge moves.

The differential expression handled by the package is the first-order system

    Y' = sigma Y + Y1,    Y1' = -sigma Y1 - sigma^2 Y - lambda Y,

for m x m matrix solutions on (0, pi), where Y1 = Y' - sigma Y is the
quasi-derivative and sigma is Hermitian-valued.  Boundary conditions are
encoded by orthogonal projectors T1, T2 and a Hermitian matrix H2 with
H2 = T2 H2 T2:

    V1(Y) = T1 Y1(0) - T1p Y(0) = 0,
    V2(Y) = T2 (Y1(pi) - H2 Y(pi)) - T2p Y(pi) = 0,

with T1p = I - T1 and T2p = I - T2.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    H2StructureViolation,
    InvalidGauge,
    NegativeShiftedEigenvalue,
    NonHermitian,
    NonProjector,
    ValidationError,
)

HERM_TOL = 1e-10

DEFAULT_ODE_TOL = 1e-10
DEFAULT_ROOT_TOL = 1e-11
RHO_ZERO_TOL = 1e-6
DEFAULT_RANK_TOL = 1e-6
DEFAULT_CLUSTER_TOL = 1e-8
DEFAULT_CONTOUR_POINTS = 32
DEFAULT_SCAN_STEP = 0.01


def mat(a) -> np.ndarray:
    """Coerce to a complex 2-D array."""
    out = np.asarray(a, dtype=complex)
    if out.ndim != 2 or out.shape[0] != out.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {out.shape}")
    return out


def herm(a: np.ndarray) -> np.ndarray:
    """Hermitian part (A + A^dagger)/2."""
    return 0.5 * (a + a.conj().T)


def opnorm(a: np.ndarray) -> float:
    """Spectral norm."""
    return float(np.linalg.norm(a, 2))


def sqrt_lambda(lam) -> np.ndarray:
    """Square root with argument in [-pi/2, pi/2).

    The principal branch already lands in (-pi/2, pi/2]; only the negative
    real axis (arg exactly pi/2) gets flipped to -pi/2.
    """
    lam = np.asarray(lam, dtype=complex)
    r = np.sqrt(lam)
    flip = (lam.real < 0) & (lam.imag == 0)
    return np.where(flip, -r, r)


# ---------------------------------------------------------------------------
# sigma representations


class SigmaFunction:
    """Hermitian matrix function of x on [0, pi].

    Supported kinds:

    * ``zero`` -- identically zero,
    * ``constant`` -- a fixed Hermitian matrix,
    * ``trig`` -- M0 + sum_j (Mj e^{ijx} + Mj^dagger e^{-ijx}) for
      coefficient matrices coeffs = [M0, M1, ...] (M0 Hermitian),
    * ``grid`` -- samples on an ascending grid covering [0, pi], evaluated
      by linear interpolation,
    * ``callable`` -- an arbitrary python function of x (internal use;
      not serializable).
    """

    def __init__(self, kind: str, m: int, *, value=None, coeffs=None,
                 x=None, values=None, fn=None):
        self.kind = kind
        self.m = int(m)
        if kind == "zero":
            pass
        elif kind == "constant":
            self.value = mat(value)
        elif kind == "trig":
            self.coeffs = [mat(c) for c in coeffs]
            if not self.coeffs:
                raise ValidationError("trig sigma needs at least one coefficient")
        elif kind == "grid":
            self.x = np.asarray(x, dtype=float)
            self.values = np.asarray(values, dtype=complex)
            if self.x.ndim != 1 or self.values.shape != (self.x.size, m, m):
                raise ValidationError("grid sigma: values must have shape (len(x), m, m)")
            if self.x.size < 2 or np.any(np.diff(self.x) <= 0):
                raise ValidationError("grid sigma: x must be strictly increasing")
            if self.x[0] > 1e-12 or self.x[-1] < np.pi - 1e-12:
                raise ValidationError("grid sigma: x must cover [0, pi]")
        elif kind == "callable":
            self.fn = fn
        else:
            raise ValidationError(f"unknown sigma kind {kind!r}")

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, m: int) -> "SigmaFunction":
        return cls("zero", m)

    @classmethod
    def constant(cls, value) -> "SigmaFunction":
        value = mat(value)
        return cls("constant", value.shape[0], value=value)

    @classmethod
    def trig(cls, coeffs) -> "SigmaFunction":
        coeffs = [mat(c) for c in coeffs]
        return cls("trig", coeffs[0].shape[0], coeffs=coeffs)

    @classmethod
    def grid(cls, x, values) -> "SigmaFunction":
        values = np.asarray(values, dtype=complex)
        return cls("grid", values.shape[1], x=x, values=values)

    @classmethod
    def wrap(cls, fn, m: int) -> "SigmaFunction":
        return cls("callable", m, fn=fn)

    # -- evaluation ---------------------------------------------------------

    def __call__(self, x):
        """Evaluate at scalar x -> (m, m), or at an array -> (nx, m, m)."""
        scalar = np.isscalar(x) or np.ndim(x) == 0
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = self._eval(xs)
        return out[0] if scalar else out

    def _eval(self, xs: np.ndarray) -> np.ndarray:
        m = self.m
        if self.kind == "zero":
            return np.zeros((xs.size, m, m), dtype=complex)
        if self.kind == "constant":
            return np.broadcast_to(self.value, (xs.size, m, m)).copy()
        if self.kind == "trig":
            out = np.broadcast_to(herm(self.coeffs[0]), (xs.size, m, m)).copy()
            for j, c in enumerate(self.coeffs[1:], start=1):
                ph = np.exp(1j * j * xs)[:, None, None]
                out += ph * c + ph.conj() * c.conj().T
            return out
        if self.kind == "grid":
            xc = np.clip(xs, self.x[0], self.x[-1])
            idx = np.clip(np.searchsorted(self.x, xc, side="right") - 1, 0, self.x.size - 2)
            x0 = self.x[idx]
            w = (xc - x0) / (self.x[idx + 1] - x0)
            w = w[:, None, None]
            return (1.0 - w) * self.values[idx] + w * self.values[idx + 1]
        # callable
        return np.stack([mat(self.fn(float(t))) for t in xs])

    def plus_constant(self, c) -> "SigmaFunction":
        """Return sigma + C for a constant matrix C (used by gauge moves and shifts)."""
        c = mat(c)
        if self.kind == "zero":
            return SigmaFunction.constant(c)
        if self.kind == "constant":
            return SigmaFunction.constant(self.value + c)
        if self.kind == "trig":
            return SigmaFunction.trig([herm(self.coeffs[0]) + c] + self.coeffs[1:])
        if self.kind == "grid":
            return SigmaFunction.grid(self.x, self.values + c)
        fn = self.fn
        return SigmaFunction.wrap(lambda x, _fn=fn, _c=c: _fn(x) + _c, self.m)

    def plus_linear(self, c: float) -> "SigmaFunction":
        """Return sigma(x) + c*x*I (the spectral shift companion)."""
        if c == 0.0:
            return self
        m = self.m
        eye = np.eye(m)
        if self.kind == "grid":
            return SigmaFunction.grid(self.x, self.values + c * self.x[:, None, None] * eye)
        this = self
        return SigmaFunction.wrap(lambda x: this(x) + c * x * eye, m)

    def sup_norm(self, samples: int = 512) -> float:
        """Sup of the spectral norm over [0, pi], estimated by sampling."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return opnorm(self.value)
        if self.kind == "grid":
            vals = self.values
        else:
            vals = self._eval(np.linspace(0.0, np.pi, samples))
        return float(np.linalg.norm(vals, ord=2, axis=(1, 2)).max())

    def hermiticity_defect(self, samples: int = 64) -> float:
        xs = np.linspace(0.0, np.pi, samples)
        vals = self._eval(xs)
        return float(np.abs(vals - vals.conj().transpose(0, 2, 1)).max())


# ---------------------------------------------------------------------------
# problem containers


@dataclass
class ProblemSpec:
    """Raw problem description prior to validation."""

    m: int
    T1: np.ndarray
    T2: np.ndarray
    H2: np.ndarray
    sigma: SigmaFunction

    def __post_init__(self):
        self.T1 = mat(self.T1)
        self.T2 = mat(self.T2)
        self.H2 = mat(self.H2)


@dataclass
class ValidatedProblem:
    """Problem that passed structural validation, with derived fields."""

    m: int
    T1: np.ndarray
    T2: np.ndarray
    H2: np.ndarray
    sigma: SigmaFunction
    T1p: np.ndarray
    T2p: np.ndarray
    p_perp: int


def _check_projector(T: np.ndarray, name: str, tol: float) -> None:
    if opnorm(T - T.conj().T) > tol:
        raise NonProjector(f"{name} is not Hermitian")
    if opnorm(T @ T - T) > tol:
        raise NonProjector(f"{name} is not idempotent")


def kernel_intersection_dim(T1: np.ndarray, T2: np.ndarray, tol: float = HERM_TOL) -> int:
    """dim(ker T1 intersect ker T2) via the rank of the stacked matrix."""
    m = T1.shape[0]
    s = np.linalg.svd(np.vstack([T1, T2]), compute_uv=False)
    return m - int(np.sum(s > tol * max(1.0, s[0] if s.size else 1.0)))


def validate_problem(spec: ProblemSpec, tol: float = HERM_TOL) -> ValidatedProblem:
    """Check projector/Hermiticity/structure constraints and derive T1p, T2p, p_perp."""
    m = spec.m
    for A, name in ((spec.T1, "T1"), (spec.T2, "T2"), (spec.H2, "H2")):
        if A.shape != (m, m):
            raise ValidationError(f"{name} must be {m}x{m}, got {A.shape}")
    _check_projector(spec.T1, "T1", tol)
    _check_projector(spec.T2, "T2", tol)
    if opnorm(spec.H2 - spec.H2.conj().T) > tol:
        raise NonHermitian("H2 is not Hermitian")
    if opnorm(spec.H2 - spec.T2 @ spec.H2 @ spec.T2) > tol:
        raise H2StructureViolation("H2 != T2 H2 T2")
    if spec.sigma.m != m:
        raise ValidationError("sigma dimension disagrees with m")
    defect = spec.sigma.hermiticity_defect()
    if defect > 1e-8:
        raise NonHermitian(f"sigma is not Hermitian (defect {defect:.2e})")
    eye = np.eye(m)
    return ValidatedProblem(
        m=m,
        T1=spec.T1,
        T2=spec.T2,
        H2=spec.H2,
        sigma=spec.sigma,
        T1p=eye - spec.T1,
        T2p=eye - spec.T2,
        p_perp=kernel_intersection_dim(spec.T1, spec.T2, tol),
    )


def apply_gauge(problem: ValidatedProblem, H1d: np.ndarray,
                tol: float = HERM_TOL) -> ValidatedProblem:
    """Transform (sigma, H2) -> (sigma + H1d, H2 - T2 H1d T2).

    H1d must be Hermitian and supported on ran(T1p), i.e. H1d = T1p H1d T1p.
    Such a move leaves the spectral data of the boundary problem unchanged.
    """
    H1d = mat(H1d)
    if opnorm(H1d - H1d.conj().T) > tol:
        raise InvalidGauge("gauge constant is not Hermitian")
    if opnorm(H1d - problem.T1p @ H1d @ problem.T1p) > tol:
        raise InvalidGauge("gauge constant is not supported on ran(T1perp)")
    raw = ProblemSpec(
        m=problem.m,
        T1=problem.T1,
        T2=problem.T2,
        H2=problem.H2 - problem.T2 @ H1d @ problem.T2,
        sigma=problem.sigma.plus_constant(H1d),
    )
    return validate_problem(raw, tol)


# ---------------------------------------------------------------------------
# index set


def build_index_set(p_perp: int, m: int, n_max: int) -> list[tuple[int, int]]:
    """Index pairs (n, k) in lexicographic order, levels 0..n_max.

    Level 0 carries only k = p_perp+1..m; every level n >= 1 carries k = 1..m.
    """
    out = [(0, k) for k in range(p_perp + 1, m + 1)]
    for n in range(1, n_max + 1):
        out.extend((n, k) for k in range(1, m + 1))
    return out


# ---------------------------------------------------------------------------
# spectral datasets


@dataclass
class SpectralEntry:
    n: int
    k: int
    lam: float
    alpha: np.ndarray
    rho: float = 0.0
    multiplicity: int = 1
    alpha_prime: np.ndarray = None  # type: ignore[assignment]


@dataclass
class SpectralDataSet:
    """Eigenvalue/weight pairs indexed by (n, k), plus the spectral shift.

    ``shift`` is the constant c making every lambda + c nonnegative; ``rho``
    on each entry is sqrt(lambda + c) >= 0.  Duplicate eigenvalues within a
    tolerance form a multiplicity group; every member of the group carries
    the same alpha, and ``alpha_prime`` is alpha on the group's first member
    (in index order) and zero on the rest.
    """

    m: int
    entries: list[SpectralEntry]
    shift: float = 0.0

    @classmethod
    def build(cls, m: int, items, shift: float = 0.0,
              cluster_tol: float = DEFAULT_CLUSTER_TOL) -> "SpectralDataSet":
        """Assemble from (n, k, lambda, alpha) tuples; derives rho and alpha_prime."""
        entries = [SpectralEntry(n=int(n), k=int(k), lam=float(l), alpha=mat(a))
                   for (n, k, l, a) in items]
        entries.sort(key=lambda e: (e.n, e.k))
        ds = cls(m=m, entries=entries, shift=float(shift))
        ds._derive(cluster_tol)
        return ds

    def _derive(self, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> None:
        for e in self.entries:
            shifted = e.lam + self.shift
            if shifted < -1e-9 * (1.0 + abs(e.lam)):
                raise NegativeShiftedEigenvalue(
                    f"lambda + c = {shifted:.6g} < 0 at (n,k)=({e.n},{e.k})")
            rho = float(np.sqrt(max(shifted, 0.0)))
            # Genuine rho values sit on a unit-spaced lattice; the square
            # root of eigenvalue noise is far below it, so snap such values
            # to the exact rho = 0 convention relied on downstream.
            e.rho = rho if rho > RHO_ZERO_TOL else 0.0
        order = sorted(range(len(self.entries)), key=lambda i: self.entries[i].lam)
        groups: list[list[int]] = []
        for i in order:
            lam = self.entries[i].lam
            if groups and abs(lam - self.entries[groups[-1][-1]].lam) <= \
                    cluster_tol * (1.0 + abs(lam)):
                groups[-1].append(i)
            else:
                groups.append([i])
        for grp in groups:
            grp.sort(key=lambda i: (self.entries[i].n, self.entries[i].k))
            for j, i in enumerate(grp):
                e = self.entries[i]
                e.multiplicity = len(grp)
                e.alpha_prime = e.alpha if j == 0 else np.zeros((self.m, self.m), complex)

    # -- convenience --------------------------------------------------------

    def max_level(self) -> int:
        return max(e.n for e in self.entries)

    def get(self, n: int, k: int) -> SpectralEntry:
        for e in self.entries:
            if e.n == n and e.k == k:
                return e
        raise KeyError((n, k))

    def level(self, n: int) -> list[SpectralEntry]:
        return [e for e in self.entries if e.n == n]

    def index_pairs(self) -> list[tuple[int, int]]:
        return [(e.n, e.k) for e in self.entries]

    def lambdas_shifted(self) -> np.ndarray:
        return np.array([e.lam + self.shift for e in self.entries])


def shift_spectrum(data: SpectralDataSet, c: float,
                   cluster_tol: float = DEFAULT_CLUSTER_TOL) -> SpectralDataSet:
    """Set the spectral shift to c (requires lambda + c >= 0 for every entry)."""
    out = SpectralDataSet(
        m=data.m,
        entries=[SpectralEntry(n=e.n, k=e.k, lam=e.lam, alpha=e.alpha.copy())
                 for e in data.entries],
        shift=float(c),
    )
    out._derive(cluster_tol)
    return out


def auto_shift(data: SpectralDataSet) -> float:
    """Smallest nonnegative c with lambda + c >= 0 throughout."""
    lam_min = min(e.lam for e in data.entries)
    return max(0.0, -lam_min)


# ---------------------------------------------------------------------------
# run configuration


@dataclass
class RunConfig:
    """Numerical knobs shared by the forward and inverse drivers."""

    ode_tol: float = DEFAULT_ODE_TOL
    root_tol: float = DEFAULT_ROOT_TOL
    rank_tol: float = DEFAULT_RANK_TOL
    cluster_tol: float = DEFAULT_CLUSTER_TOL
    contour_points: int = DEFAULT_CONTOUR_POINTS
    scan_step: float = DEFAULT_SCAN_STEP
    N: int = 20
    grid: int = 501
    n0: int | None = None
    shift: float | None = None

    def with_(self, **kw) -> "RunConfig":
        return replace(self, **kw)
