"""Closed-form spectral data for scalar problems with constant sigma.

For constant sigma = s the quasi-derivative system collapses to -u'' = lam u,
so everything reduces to explicit trig/characteristic equations.  This script
derives the characteristic function and the Weyl-matrix residues with sympy,
then evaluates them numerically.  The printed values are frozen into the test
suite; rerun this script if they ever need to be regenerated.

Two boundary geometries are covered:

* T1 = T2 = 1 ("Neumann-type"): phi = cos(rho x) + s sin(rho x)/rho,
  Delta = phi^[1](pi).  For s = 1 the eigenvalues are {-1} union {n^2}.
* T1 = 0, T2 = 1 ("Dirichlet-at-0"): phi = sin(rho x)/rho,
  Delta = phi^[1](pi); roots of rho cos(rho pi) = s sin(rho pi).
"""

import mpmath as mp
import sympy as sp


def neumann_type(s_val, n_levels=8):
    rho, lam, x, s = sp.symbols("rho lam x s", positive=False)
    phi = sp.cos(rho * x) + s * sp.sin(rho * x) / rho
    phi_q = sp.diff(phi, x) - s * phi          # quasi-derivative
    zeta = sp.sin(rho * x) / rho               # zeta(0)=0, zeta^[1](0)=1
    zeta_q = sp.diff(zeta, x) - s * zeta
    Delta = phi_q.subs(x, sp.pi)
    M = -(zeta_q.subs(x, sp.pi)) / Delta
    # alpha_n = Res_{lam=lam_n} M, lam = rho^2 => d lam = 2 rho d rho
    residue = sp.simplify(-(zeta_q.subs(x, sp.pi)) * 2 * rho
                          / sp.diff(Delta, rho))
    residue = sp.simplify(residue.subs(s, s_val))
    Delta_s = sp.lambdify(rho, Delta.subs(s, s_val), "mpmath")
    res_f = sp.lambdify(rho, residue, "mpmath")

    out = []
    # negative eigenvalue(s): rho = i tau
    tau = sp.symbols("tau", positive=True)
    Delta_neg = sp.simplify(Delta.subs({rho: sp.I * tau, s: s_val}))
    f = sp.lambdify(tau, sp.re(Delta_neg), "mpmath")
    try:
        t0 = mp.findroot(f, mp.mpf(s_val))
        lam0 = -float(t0) ** 2
        al0 = complex(res_f(mp.mpc(0, float(t0)))).real
        out.append((lam0, al0))
    except ValueError:
        pass
    for n in range(1, n_levels + 1):
        r = mp.findroot(Delta_s, mp.mpf(n))
        out.append((float(r) ** 2, float(res_f(r))))
    return out


def dirichlet_at_zero(s_val, n_levels=8):
    rho, x, s = sp.symbols("rho x s")
    phi = sp.sin(rho * x) / rho
    phi_q = sp.diff(phi, x) - s * phi
    zeta = -sp.cos(rho * x) - s * sp.sin(rho * x) / rho
    zeta_q = sp.diff(zeta, x) - s * zeta
    Delta = phi_q.subs(x, sp.pi)
    residue = sp.simplify(-(zeta_q.subs(x, sp.pi)) * 2 * rho
                          / sp.diff(Delta, rho))
    Delta_s = sp.lambdify(rho, Delta.subs(s, s_val), "mpmath")
    res_f = sp.lambdify(rho, residue.subs(s, s_val), "mpmath")
    out = []
    for n in range(0, n_levels + 1):
        r = mp.findroot(Delta_s, n + 0.45)
        out.append((float(r), float(r) ** 2, float(res_f(r))))
    return out


if __name__ == "__main__":
    mp.mp.dps = 30
    print("# T1=T2=1, sigma=1 (lam, alpha):")
    for lam, al in neumann_type(1.0):
        print(f"    ({lam:.15g}, {al:.15g}),")
    print("# closed forms: alpha_n = 2 n^2/(pi (n^2+1)); alpha(-1) = 2/(e^{2 pi}-1) =",
          f"{2.0 / (float(mp.e) ** (2 * float(mp.pi)) - 1.0):.15g}")
    print("# T1=T2=1, sigma=0.3 (lam, alpha):")
    for lam, al in neumann_type(0.3):
        print(f"    ({lam:.15g}, {al:.15g}),")
    print("# T1=0, T2=1, sigma=0.3 (rho, lam, alpha):")
    for r, lam, al in dirichlet_at_zero(0.3):
        print(f"    ({r:.15g}, {lam:.15g}, {al:.15g}),")
