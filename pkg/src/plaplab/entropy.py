"""Entropy functionals along the second parabolic flow and the sharp
L^p-logarithmic Sobolev inequality.

Everything is phrased in the density rho = v^{p-1} = e^{-u} of a kind-B run:
N_p = int rho u - (n/p) log t, Fbar = int |grad u|^p rho, and the
scale-normalized W_p(phi, t) with the Gamma-ratio prefactor; the entropy
formula's dissipation integral is assembled from the anisotropy tensor and
serves as the independent side of the dW/dt cross-check.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad

from .geometry import sphere_area
from .parabolic import Grid1D, ParabolicRun, ParabolicError, run_flow
from .reports import EntropySeries, EstimateReport

TRUNC_REL = 1e-16   # integrals ignore cells with rho below this times max


def norm_prefactor(p, n):
    """Gamma(n/2+1)/Gamma(n/p*+1) / (pi^{n/2} (p*^{p-1} p)^{n/p}); the
    normalization making W_p vanish identically on the fundamental solution."""
    ps = p / (p - 1.0)
    lg = math.lgamma(n / 2.0 + 1.0) - math.lgamma(n / ps + 1.0)
    return math.exp(lg) * math.pi ** (-n / 2.0) * (ps ** (p - 1.0) * p) ** (-n / p)


def mass(run_or_grid, rho, n=None, area_factor=None):
    """int rho dmu with the truncation tail added to the error bar."""
    if isinstance(run_or_grid, ParabolicRun):
        grid, af = run_or_grid.grid, run_or_grid.area_factor
    else:
        grid, af = run_or_grid, (area_factor or 1.0)
    keep = rho >= TRUNC_REL * np.max(rho)
    val = af * grid.h * float(np.sum((grid.w_center * rho)[keep]))
    tail = af * grid.h * float(np.sum((grid.w_center * rho)[~keep]))
    return val, tail


def _entropy_pieces(grid: Grid1D, rho, p, n, t, area_factor):
    """(mass, N, Fbar, W_p, RHS) at one time from a density snapshot."""
    keep = rho >= TRUNC_REL * np.max(rho)
    wgt = area_factor * grid.h * grid.w_center
    u = -np.log(np.maximum(rho, 1e-300))
    ur = grid.center_gradient(u)
    f = ur * ur
    m = float(np.sum((wgt * rho)[keep]))
    N = float(np.sum((wgt * rho * u)[keep]))
    fbar = float(np.sum((wgt * rho * f ** (p / 2.0))[keep]))
    N_p = N - (n / p) * math.log(t)
    W = t * fbar + N_p + math.log(norm_prefactor(p, n)) - n
    # dissipation integrand: |f^{p/2-1} Hess u - a/(tp)|_A^2 (flat metric)
    urr = grid.center_gradient(ur)
    with np.errstate(divide="ignore", invalid="ignore"):
        fp = np.where(f > 0, f ** (p / 2.0 - 1.0), 0.0)
        M_rr = fp * urr - 1.0 / ((p - 1.0) * t * p)
        if n > 1:
            M_ang = fp * ur / grid.x - 1.0 / (t * p)
        else:
            M_ang = np.zeros_like(ur)
    dens = (p - 1.0) ** 2 * M_rr ** 2 + (n - 1.0) * M_ang ** 2
    rhs = t * p * float(np.sum((wgt * rho * dens)[keep]))
    return m, N_p, fbar, W, rhs


def entropy_series(run: ParabolicRun, n, mass_tol=1e-6):
    """EntropySeries along a kind-B (density) run; times are absolute
    (the normalization's t is the solution's own age)."""
    if run.kind != "B":
        raise ParabolicError("entropy series wants a kind-B density run")
    p = run.p
    ts, ms, Nps, fbars, Ws, rhss = [], [], [], [], [], []
    for k in range(len(run.times)):
        t = run.times[k]
        m, N_p, fbar, W, rhs = _entropy_pieces(run.grid, run.fields[k], p, n,
                                               t, run.area_factor)
        ts.append(t); ms.append(m); Nps.append(N_p)
        fbars.append(fbar); Ws.append(W); rhss.append(rhs)
    ts = np.array(ts); Nps = np.array(Nps); Ws = np.array(Ws)
    F_p = np.gradient(Nps, ts)
    dWdt = np.gradient(Ws, ts)
    if abs(ms[0] - 1.0) > mass_tol:
        raise ParabolicError(f"initial mass {ms[0]:.8f} is not 1 within {mass_tol:g}")
    return EntropySeries(p=p, n=n, times=ts, mass=np.array(ms), N_p=Nps,
                         F_p=F_p, Fbar=np.array(fbars), W_p=Ws,
                         rhs=np.array(rhss), dWdt=dWdt,
                         norm_const=norm_prefactor(p, n),
                         params={"kind": run.kind})


def log_concavity_defect(series: EntropySeries):
    """max second difference of N_p in log t (<= 0 up to tolerance when
    Ric >= 0: N_p is concave in log t)."""
    lt = np.log(series.times)
    d2 = np.diff(series.N_p, 2) / np.diff(lt)[:-1] ** 2
    return float(np.max(d2)) if len(d2) else 0.0


def conservation_check(grid: Grid1D, rho0, psi0, p, t_end, n=1, t_birth=0.0,
                       delta=1e-12, psi_delta=1e-10, cfl=0.35,
                       area_factor=1.0, max_steps=2_000_000):
    """Co-evolve psi_t = L psi along the kind-B flow and report the drift of
    int psi rho dmu (a conserved pairing of the flow with its linearization).

    L psi = div(f^{p/2-1} A grad psi) - p f^{p/2-1} <grad u, grad psi>; on a
    radial grid the tensor A acts as the factor (p-1) on radial gradients.
    """
    rho = np.asarray(rho0, float).copy()
    psi = np.asarray(psi0, float).copy()
    wgt = area_factor * grid.h * grid.w_center

    def pairing():
        return float(np.sum(wgt * psi * rho))

    start = pairing()
    t = 0.0
    steps = 0
    drift_max = 0.0
    while t < t_end - 1e-15 and steps < max_steps:
        g = grid.face_gradient(rho)
        rho_face = np.ones(len(rho) + 1)
        rho_face[1:-1] = 0.5 * (rho[1:] + rho[:-1])
        s2 = (g / rho_face) ** 2
        f_face = s2 + delta
        coef_rho = f_face ** (p / 2.0 - 2.0) * ((p - 1.0) * s2 + delta)
        # psi coefficients from the same face data
        a_psi = (p - 1.0) * (s2 + psi_delta) ** (p / 2.0 - 1.0)
        u_r_face = -g / rho_face
        drift_speed = p * (s2 + psi_delta) ** (p / 2.0 - 1.0) * np.abs(u_r_face)
        lam_rho = (grid.w_face[1:] * coef_rho[1:] + grid.w_face[:-1] * coef_rho[:-1]) \
            / (grid.w_center * grid.h ** 2)
        lam_psi = (grid.w_face[1:] * a_psi[1:] + grid.w_face[:-1] * a_psi[:-1]) \
            / (grid.w_center * grid.h ** 2)
        dt = cfl * 2.0 / max(float(np.max(lam_rho)), float(np.max(lam_psi)), 1e-30)
        dt = min(dt, cfl * grid.h / max(float(np.max(drift_speed)), 1e-30),
                 t_end - t)
        # step psi first (uses current rho), then rho
        gp = grid.face_gradient(psi)
        flux_psi = a_psi * (s2 + psi_delta) ** 0.0 * gp
        gp_c = grid.center_gradient(psi)
        u_r_c = -grid.center_gradient(rho) / rho
        f_c = u_r_c ** 2 + psi_delta
        psi = psi + dt * (grid.divergence(flux_psi)
                          - p * f_c ** (p / 2.0 - 1.0) * u_r_c * gp_c)
        rho = rho + dt * grid.divergence(f_face ** (p / 2.0 - 1.0) * g)
        t += dt
        steps += 1
        if steps % 200 == 0:
            drift_max = max(drift_max, abs(pairing() - start))
    if steps >= max_steps:
        raise ParabolicError("conservation check ran out of steps")
    drift_max = max(drift_max, abs(pairing() - start))
    return {"drift": drift_max, "initial": start, "final": pairing(),
            "steps": steps}


# ---------------------------------------------------------------------------
# logarithmic Sobolev inequality

def log_sobolev_constant(p, n):
    """Sharp Euclidean constant, via log-Gamma evaluation."""
    if p <= 1:
        raise ValueError("need p > 1")
    ps = p / (p - 1.0)
    lg = math.lgamma(n / 2.0 + 1.0) - math.lgamma(n / ps + 1.0)
    return (p / n) * ((p - 1.0) / math.e) ** (p - 1.0) * math.pi ** (-p / 2.0) \
        * math.exp(lg * p / n)


def _radial_integrals(field, p, n):
    """(int |w|^p, int |grad w|^p, int |w|^p log |w|^p) on R^n for a radially
    sampled field (quadrature-exact when evaluators are attached)."""
    area = sphere_area(n) if n > 1 else 2.0   # the 1D 'sphere' S^0
    if field.value_fn is not None and field.deriv_fn is not None:
        wfn, dfn = field.value_fn, field.deriv_fn
        lo, hi = field.s[0], field.s[-1]

        def iq(f):
            val, _ = quad(f, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=400)
            return area * val

        mass_p = iq(lambda r: abs(wfn(r)) ** p * r ** (n - 1))
        grad_p = iq(lambda r: abs(dfn(r)) ** p * r ** (n - 1))
        ent = iq(lambda r: abs(wfn(r)) ** p * math.log(max(abs(wfn(r)) ** p, 1e-300))
                 * r ** (n - 1))
        return mass_p, grad_p, ent
    r = field.s
    wv = np.abs(field.values)
    dv = np.abs(np.gradient(field.values, r, edge_order=2))
    wt = area * r ** (n - 1.0)
    mass_p = float(np.trapz(wv ** p * wt, r))
    grad_p = float(np.trapz(dv ** p * wt, r))
    wp = wv ** p
    ent = float(np.trapz(np.where(wp > 0, wp * np.log(np.maximum(wp, 1e-300)), 0.0) * wt, r))
    return mass_p, grad_p, ent


def log_sobolev_check(w_field, p, n, t_grid=None, tol=1e-3):
    """int |w|^p log|w|^p <= (n/p) log(C_{p,n} int |grad w|^p) for unit-mass
    |w|^p (renormalized internally), plus the companion scan
    W_p(phi, t) >= 0 over a t-grid for the induced density rho = |w|^p.

    w_field: radial ScalarField sampled on [0, R] (n >= 2) or a symmetric
    half-line profile (n = 1).
    """
    mass_p, grad_p, ent = _radial_integrals(w_field, p, n)
    # renormalize |w|^p to unit mass: w -> w / mass^{1/p}
    ent = ent / mass_p - math.log(mass_p)
    grad_p = grad_p / mass_p
    lhs = ent
    rhs = (n / p) * math.log(log_sobolev_constant(p, n) * grad_p)
    report = EstimateReport("log_sobolev", lhs, rhs, tol=tol,
                            params={"p": p, "n": n, "C_pn": log_sobolev_constant(p, n),
                                    "grad_p": grad_p})
    # companion: W_p(phi, t) = t p^p grad_p - ent + log(prefactor) - (n/p) log t - n
    if t_grid is None:
        t_star = n / (p * p ** p * grad_p)
        t_grid = np.geomspace(t_star / 8.0, t_star * 8.0, 25)
    Wvals = np.array([t * p ** p * grad_p - ent + math.log(norm_prefactor(p, n))
                      - (n / p) * math.log(t) - n for t in t_grid])
    return {"report": report, "t_grid": np.asarray(t_grid), "W_p": Wvals,
            "W_min": float(np.min(Wvals))}


def extremal_profile_field(p, n, t_star=1.0, R=None, num=8001):
    """|w|^p = v0^{p-1}(., t_star): the equality case of the inequality."""
    from .fields import radial_field
    from .parabolic import fundamental_b

    ps = p / (p - 1.0)
    c = (t_star * ps ** (p - 1.0) * p) ** (-1.0 / (p - 1.0))
    if R is None:
        R = (80.0 / c) ** (1.0 / ps)   # rho ~ e^{-80} at the edge
    r = np.linspace(1e-9, R, num)

    def wfn(rr):
        return fundamental_b(rr, t_star, p, n) ** ((p - 1.0) / p)

    def dfn(rr, h=1e-6 * R):
        return (wfn(rr + h) - wfn(np.maximum(rr - h, 0.0))) / (2.0 * h)

    # analytic derivative: w = rho^{1/p}, rho = N e^{-c r^{ps}}
    N = norm_prefactor(p, n) / t_star ** (n / p)

    def wfn_exact(rr):
        return (N * np.exp(-c * np.asarray(rr, float) ** ps)) ** (1.0 / p)

    def dfn_exact(rr):
        rr = np.asarray(rr, float)
        return wfn_exact(rr) * (-c * ps * rr ** (ps - 1.0)) / p

    return radial_field(r, wfn_exact(r), p, value_fn=wfn_exact, deriv_fn=dfn_exact,
                        meta={"kind": "log-sobolev-extremal", "t_star": t_star})
