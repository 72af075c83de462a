"""Degenerate parabolic p-Laplace flows, their regularizations, the explicit
extremal solutions, and the Li-Yau-type estimate checks.

Equation A:  v_t = div(|grad v|^{p-2} grad v)            (delta-regularized)
A-pressure:  phi_t = (p-2)/(p-1) phi div(varphi_eps(|grad phi|) grad phi)
             + psi_eps(|grad phi|)
Equation B:  u_t = div(|grad u|^{p-2} grad u) - |grad u|^p, stepped in the
             conservative density form rho = e^{-u} = v^{p-1} (mass-exact)
B-reg:       u_t = div(f_eps^{p/2-1} grad u) - f_eps^{p/2}, f_eps = |grad u|^2 + eps

All runs live on 1D or radially symmetric grids (weight w(r)^{n-1}), which
covers every check here; the flat-2D identity engine lives in identities.py.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from .reports import HarnackReport


class ParabolicError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# regularization functions (zeta, varphi, psi)

def _ramp_integral(x, theta):
    """T(x): C^1 monotone 0 -> 1 with T'(0)=T'(1)=0 and max slope 1/(1-theta)
    (integral of a trapezoid slope profile with ramp fraction theta)."""
    x = np.clip(np.asarray(x, float), 0.0, 1.0)
    S = np.where(
        x <= theta, x * x / (2.0 * theta),
        np.where(x <= 1.0 - theta,
                 theta / 2.0 + (x - theta),
                 theta / 2.0 + (1.0 - 2.0 * theta)
                 + (theta - (1.0 - x) ** 2 / theta) / 2.0))
    return S / (1.0 - theta)


def _ramp(x, theta):
    x = np.clip(np.asarray(x, float), 0.0, 1.0)
    r = np.minimum(np.minimum(x / theta, 1.0), (1.0 - x) / theta)
    return np.maximum(r, 0.0) / (1.0 - theta)


class RegFunctions:
    """The triple (zeta_eps, varphi_eps, psi_eps) regularizing the pressure
    equation.

    zeta = 1 on [0, a_eps], = p-1 for r >= eps, with a_eps exactly the
    printed choice (eps (p-1)^{+-1/eps} / 2); the bridge is log-linear in
    (log r, log zeta) with smoothed ends, whose ramp fraction adapts to the
    slack eps*log2 so that |r zeta'| <= eps zeta holds with margin for every
    admissible (p, eps). varphi solves r varphi'/varphi = zeta - 1 and equals
    r^{p-2} for r >= eps; psi(r) = p/(p-1) (r^2 varphi - int_0^r s varphi ds).
    """

    def __init__(self, p, eps, grid=4001):
        if p <= 1:
            raise ParabolicError("need p > 1")
        if not (0.0 < eps < 1.0):
            raise ParabolicError("need 0 < eps < 1")
        self.p, self.eps = float(p), float(eps)
        # a_eps = eps (p-1)^{+-1/eps}/2 computed in logs ((p-1)^{1/eps} can
        # underflow the float range long before the construction degenerates)
        if p == 2.0:
            self.delta_log = 0.0
            self.log_a = math.log(eps) - math.log(2.0)
        else:
            self.delta_log = math.log(p - 1.0)
            sign = 1.0 if p < 2.0 else -1.0
            self.log_a = math.log(eps) + sign * self.delta_log / eps - math.log(2.0)
        self.a = math.exp(self.log_a) if self.log_a > -745 else 0.0
        self.L = math.log(eps) - self.log_a
        if abs(self.delta_log) < 1e-15:
            self.theta = 0.25
        else:
            rho = abs(self.delta_log) / (self.L * eps)
            # rho < 1 always (slack eps*log2); put the max slope halfway
            self.theta = 0.5 * (1.0 - rho)
            if self.theta <= 0:
                raise ParabolicError("bridge constraint unsatisfiable")
        self._build_tables(grid)

    # -- zeta ---------------------------------------------------------------

    def _x(self, r):
        with np.errstate(divide="ignore"):
            return (np.log(np.asarray(r, float)) - self.log_a) / self.L

    def zeta(self, r):
        r = np.asarray(r, float)
        out = np.where(r >= self.eps, self.p - 1.0, 1.0)
        mid = (r > self.a) & (r < self.eps)
        if np.any(mid):
            out = np.where(mid, np.exp(self.delta_log * _ramp_integral(self._x(r), self.theta)), out)
        return out if out.ndim else float(out)

    def r_zeta_prime(self, r):
        """r zeta'(r) = zeta * delta_log * T'(x) / L on the bridge, 0 outside."""
        r = np.asarray(r, float)
        mid = (r > self.a) & (r < self.eps)
        out = np.zeros_like(r, dtype=float)
        if np.any(mid):
            x = self._x(r)
            out = np.where(mid, self.zeta(r) * self.delta_log
                           * _ramp(x, self.theta) / self.L, 0.0)
        return out if out.ndim else float(out)

    # -- varphi and psi -------------------------------------------------------

    def _build_tables(self, grid):
        # cumulative B(x) = int_0^x (zeta - 1) dxi and the s*varphi integral
        # over the bridge, splined on a grid aligned with the ramp breakpoints
        xs = np.unique(np.concatenate([
            np.linspace(0.0, 1.0, grid),
            [self.theta, 1.0 - self.theta]]))
        zeta_vals = np.exp(self.delta_log * _ramp_integral(xs, self.theta))
        # Gauss-Legendre 5 per micro-interval for the two cumulative tables
        gl_x, gl_w = np.polynomial.legendre.leggauss(5)
        mid = (xs[:-1] + xs[1:]) / 2.0
        half = (xs[1:] - xs[:-1]) / 2.0
        nodes = mid[:, None] + half[:, None] * gl_x[None, :]
        wts = half[:, None] * gl_w[None, :]
        zn = np.exp(self.delta_log * _ramp_integral(nodes, self.theta))
        B_pieces = np.sum((zn - 1.0) * wts, axis=1)
        B = np.concatenate([[0.0], np.cumsum(B_pieces)])
        self._B = CubicSpline(xs, B)
        self._B_total = float(B[-1])
        # log varphi on the bridge: log varphi(x) = (p-2) log eps - L (B(1)-B(x))
        self._logphi_a = (self.p - 2.0) * math.log(self.eps) - self.L * self._B_total
        self.c0 = math.exp(self._logphi_a) if self._logphi_a < 709 else math.inf
        # I_bridge(x) = int_a^{r(x)} s varphi ds = int_0^x e^{2(log a + L xi)} varphi L dxi
        # (exponents assembled before exp so huge varphi * tiny s^2 stays finite)
        logphi_n = self._logphi_a + self.L * self._B(nodes)
        log_sn2 = 2.0 * (self.log_a + self.L * nodes)
        I_pieces = np.sum(np.exp(log_sn2 + logphi_n) * self.L * wts, axis=1)
        I = np.concatenate([[0.0], np.cumsum(I_pieces)])
        self._Ibridge = CubicSpline(xs, I)
        self._Ibridge_total = float(I[-1])
        # int_0^eps s varphi ds  (the [0,a] piece is exp-assembled too)
        self._I_a = math.exp(self._logphi_a + 2.0 * self.log_a - math.log(2.0)) \
            if self._logphi_a + 2.0 * self.log_a < 700 else 0.0
        self.I_eps = self._I_a + self._Ibridge_total
        # psi(r) = r^p + psi_shift for r >= eps
        self.psi_shift = (self.p / (self.p - 1.0)) * (self.eps ** self.p / self.p - self.I_eps)

    def varphi(self, r):
        r = np.asarray(r, float)
        out = np.empty_like(r, dtype=float)
        lo = r <= self.a
        hi = r >= self.eps
        mid = ~lo & ~hi
        out[lo] = self.c0
        out[hi] = r[hi] ** (self.p - 2.0)
        if np.any(mid):
            out[mid] = np.exp(self._logphi_a + self.L * self._B(self._x(r[mid])))
        return out if out.ndim else float(out)

    def int_s_varphi(self, r):
        """int_0^r s varphi(s) ds (the quadrature cache behind psi)."""
        r = np.asarray(r, float)
        out = np.empty_like(r, dtype=float)
        lo = r <= self.a
        hi = r >= self.eps
        mid = ~lo & ~hi
        with np.errstate(divide="ignore"):
            out[lo] = np.exp(self._logphi_a + 2.0 * np.log(np.maximum(r[lo], 1e-300))
                             - math.log(2.0))
        out[hi] = self.I_eps + (r[hi] ** self.p - self.eps ** self.p) / self.p
        if np.any(mid):
            out[mid] = self._I_a + self._Ibridge(self._x(r[mid]))
        return out if out.ndim else float(out)

    def psi(self, r):
        r = np.asarray(r, float)
        out = (self.p / (self.p - 1.0)) * (r * r * self.varphi(r) - self.int_s_varphi(r))
        return out if out.ndim else float(out)

    def check_invariants(self, samples=1000):
        """All RegFunctions invariants, sampled; raises on violation.

        The derivative constraint is checked in bridge coordinates x
        (|r zeta'| / (eps zeta) = |log(p-1)| T'(x) / (L eps) there and 0
        outside), which stays exact even when a_eps underflows."""
        xs = np.linspace(0.0, 1.0, samples)
        lhs = abs(self.delta_log) * _ramp(xs, self.theta) / self.L
        assert np.all(lhs <= self.eps * (1.0 + 1e-12)), "|r zeta'| <= eps zeta failed"
        if self.a > 0:
            assert abs(self.zeta(self.a * 0.5) - 1.0) < 1e-14
        assert abs(self.zeta(self.eps * 2.0) - (self.p - 1.0)) < 1e-14
        r_hi = np.geomspace(self.eps, max(10.0, 2 * self.eps), 50)
        assert np.max(np.abs(self.varphi(r_hi) - r_hi ** (self.p - 2.0))) \
            < 1e-12 * np.max(r_hi ** abs(self.p - 2.0))
        # the s*varphi cache against an independent log-space quadrature
        for x_up in (0.5, 1.0):
            def g(xi):
                logphi = self._logphi_a + self.L * float(self._B(xi))
                return math.exp(2.0 * (self.log_a + self.L * xi) + logphi) * self.L
            pts = [t for t in (self.theta, 1.0 - self.theta) if t < x_up]
            direct, _ = quad(g, 0.0, x_up, points=pts or None,
                             epsabs=1e-300, epsrel=1e-11, limit=300)
            mine = float(self._Ibridge(x_up))
            rel = abs(mine - direct) / max(direct, 1e-300)
            assert rel < 1e-7, f"s*varphi cache off by {rel:.2e} at x={x_up}"
        return True


def reg_functions(p, eps):
    rf = RegFunctions(p, eps)
    rf.check_invariants()
    return rf


# ---------------------------------------------------------------------------
# exact solutions

def barenblatt_beta(p, n):
    lam = p + n * (p - 2.0)
    if lam <= 0:
        raise ParabolicError("need p > 2n/(n+1)")
    return 1.0 / lam


def barenblatt(x, t, p, n):
    """Source-type solution H_p of equation A on R^n: compactly supported for
    p > 2, positive everywhere (power tails) for 2n/(n+1) < p < 2."""
    if abs(p - 2.0) < 1e-14:
        raise ParabolicError("p = 2 is the Gaussian; use heat_kernel")
    beta = barenblatt_beta(p, n)
    kappa = beta ** (1.0 / (p - 1.0)) * (2.0 - p) / p
    q = p / (p - 1.0)
    m = (p - 1.0) / (p - 2.0)
    xi = np.abs(np.asarray(x, float)) / t ** beta
    base = 1.0 + kappa * xi ** q
    out = np.where(base > 0, t ** (-n * beta) * np.maximum(base, 0.0) ** m, 0.0)
    return out if out.ndim else float(out)


def barenblatt_derivs(x, t, p, n):
    """(H, H_x, H_t) with analytic derivatives, inside the positivity set."""
    beta = barenblatt_beta(p, n)
    kappa = beta ** (1.0 / (p - 1.0)) * (2.0 - p) / p
    q = p / (p - 1.0)
    m = (p - 1.0) / (p - 2.0)
    x = np.asarray(x, float)
    r = np.abs(x)
    xi = r / t ** beta
    base = 1.0 + kappa * xi ** q
    pos = base > 0
    H = np.where(pos, t ** (-n * beta) * np.maximum(base, 1e-300) ** m, 0.0)
    Gp = m * kappa * q * xi ** (q - 1.0) * np.maximum(base, 1e-300) ** (m - 1.0)
    Hx = np.where(pos, t ** (-n * beta - beta) * Gp * np.sign(x), 0.0)
    Ht = np.where(pos, -beta * t ** (-n * beta - 1.0)
                  * (n * np.maximum(base, 1e-300) ** m + xi * Gp), 0.0)
    return H, Hx, Ht


def barenblatt_support_radius(p, n, t):
    """Edge of the support for p > 2: |x| = (p/((p-2) beta^{1/(p-1)}))^{(p-1)/p} t^beta."""
    if p <= 2:
        return math.inf
    beta = barenblatt_beta(p, n)
    return (p / ((p - 2.0) * beta ** (1.0 / (p - 1.0)))) ** ((p - 1.0) / p) * t ** beta


def barenblatt_pressure(x, t, p, n):
    """phi = (p-1)/(p-2) v^{(p-2)/(p-1)} for v = H_p (p > 2: a truncated
    power profile with compact support)."""
    v = barenblatt(x, t, p, n)
    return (p - 1.0) / (p - 2.0) * np.maximum(v, 0.0) ** ((p - 2.0) / (p - 1.0))


def fundamental_b(x, t, p, n, x0=0.0):
    """The fundamental solution v0 of equation B (unit int v^{p-1})."""
    if p <= 1:
        raise ParabolicError("need p > 1")
    ps = p / (p - 1.0)
    c = (t * ps ** (p - 1.0) * p) ** (-1.0 / (p - 1.0))
    N = math.pi ** (-n / 2.0) * (ps ** (p - 1.0) * p * t) ** (-n / p) \
        * math.gamma(n / 2.0 + 1.0) / math.gamma(n / ps + 1.0)
    r = np.abs(np.asarray(x, float) - x0)
    rho = N * np.exp(-c * r ** ps)
    out = rho ** (1.0 / (p - 1.0))
    return out if out.ndim else float(out)


def fundamental_b_u(x, t, p, n, x0=0.0):
    """(u, u_r, u_t) for u = -(p-1) log v0 = -log N + c r^{p*}; satisfies
    |grad u|^p + u_t = n/(pt) exactly."""
    ps = p / (p - 1.0)
    c = (t * ps ** (p - 1.0) * p) ** (-1.0 / (p - 1.0))
    N = math.pi ** (-n / 2.0) * (ps ** (p - 1.0) * p * t) ** (-n / p) \
        * math.gamma(n / 2.0 + 1.0) / math.gamma(n / ps + 1.0)
    x = np.asarray(x, float)
    r = np.abs(x - x0)
    u = -math.log(N) + c * r ** ps
    ur = c * ps * r ** (ps - 1.0) * np.sign(x - x0)
    ut = n / (p * t) - c * r ** ps / ((p - 1.0) * t)
    return u, ur, ut


def heat_kernel(x, t, n):
    x = np.asarray(x, float)
    return (4.0 * math.pi * t) ** (-n / 2.0) * np.exp(-x * x / (4.0 * t))


# ---------------------------------------------------------------------------
# grids and runs

@dataclass
class Grid1D:
    """Cell-centered uniform grid; weight w(r)^{n-1} encodes radial symmetry
    (all-ones for a flat interval)."""

    x: np.ndarray
    h: float
    w_center: np.ndarray
    w_face: np.ndarray      # length N+1; w_face[0] = 0 realizes the pole
    bc: str = "noflux"      # 'noflux' | 'dirichlet' | 'noflux-dirichlet' (right pin only)

    @classmethod
    def interval(cls, x_lo, x_hi, N, bc="noflux"):
        h = (x_hi - x_lo) / N
        x = x_lo + h * (np.arange(N) + 0.5)
        return cls(x=x, h=h, w_center=np.ones(N), w_face=np.ones(N + 1), bc=bc)

    @classmethod
    def radial(cls, R, N, n, bc="noflux"):
        h = R / N
        x = h * (np.arange(N) + 0.5)
        faces = h * np.arange(N + 1)
        return cls(x=x, h=h, w_center=x ** (n - 1.0),
                   w_face=faces ** (n - 1.0), bc=bc)

    def face_gradient(self, v):
        """(v_{i+1} - v_i)/h on interior faces; boundary faces get 0
        (no-flux) -- Dirichlet runs pin the end cells instead."""
        g = np.zeros(len(v) + 1)
        g[1:-1] = np.diff(v) / self.h
        return g

    def center_gradient(self, v):
        g = np.empty_like(v)
        g[1:-1] = (v[2:] - v[:-2]) / (2.0 * self.h)
        g[0] = (v[1] - v[0]) / self.h
        g[-1] = (v[-1] - v[-2]) / self.h
        return g

    def divergence(self, flux_face):
        return np.diff(self.w_face * flux_face) / (self.w_center * self.h)

    def integrate(self, vals, area_factor=1.0):
        return area_factor * self.h * float(np.sum(self.w_center * vals))


def _apply_pins(v_new, v_old, grid):
    if grid.bc == "dirichlet":
        v_new[0], v_new[-1] = v_old[0], v_old[-1]
    elif grid.bc == "noflux-dirichlet":
        v_new[-1] = v_old[-1]


def _coef_a(g2, p, delta):
    return (g2 + delta) ** (p / 2.0 - 1.0)


def step_equation_a(v, grid: Grid1D, dt, p, delta=1e-10):
    """One conservative explicit step of equation A; the cell integral of v
    is unchanged to rounding under no-flux boundaries."""
    g = grid.face_gradient(v)
    a = _coef_a(g * g, p, delta)
    vn = v + dt * grid.divergence(a * g)
    _apply_pins(vn, v, grid)
    return vn


def step_equation_a_implicit(v, grid: Grid1D, dt, p, delta=1e-10):
    """Backward Euler with lagged diffusivity (for stiff p > 2 runs)."""
    g = grid.face_gradient(v)
    a = _coef_a(g * g, p, delta) * grid.w_face
    N = len(v)
    lower = np.zeros(N); upper = np.zeros(N); main = np.ones(N)
    lam = dt / (grid.w_center * grid.h ** 2)
    main += lam * (a[1:] + a[:-1])
    upper[1:] = -lam[:-1] * a[1:-1]
    lower[:-1] = -lam[1:] * a[1:-1]
    ab = np.vstack([upper, main, lower])
    vn = solve_banded((1, 1), ab, v)
    _apply_pins(vn, v, grid)
    return vn


def cfl_dt(grid: Grid1D, coef_face, cfl=0.4):
    lam = (grid.w_face[1:] * coef_face[1:] + grid.w_face[:-1] * coef_face[:-1]) \
        / (grid.w_center * grid.h ** 2)
    mx = float(np.max(lam))
    if mx <= 0:
        return math.inf
    return cfl * 2.0 / mx


def step_equation_b_reg(u, grid: Grid1D, dt, p, eps):
    """One explicit step of the regularized equation B:
    u_t = div(f_eps^{p/2-1} grad u) - f_eps^{p/2}."""
    g = grid.face_gradient(u)
    a = (g * g + eps) ** (p / 2.0 - 1.0)
    gc = grid.center_gradient(u)
    fc = gc * gc + eps
    un = u + dt * (grid.divergence(a * g) - fc ** (p / 2.0))
    _apply_pins(un, u, grid)
    return un


def step_density_b(rho, grid: Grid1D, dt, p, delta=1e-12):
    """Conservative step of equation B in the density variable
    rho = v^{p-1} = e^{-u}:  rho_t = div(f^{p/2-1} grad rho) with
    f = |grad rho / rho|^2 + delta at faces. Mass-exact under no-flux."""
    g = grid.face_gradient(rho)
    rho_face = np.ones(len(rho) + 1)
    rho_face[1:-1] = 0.5 * (rho[1:] + rho[:-1])
    f = (g / rho_face) ** 2 + delta
    a = f ** (p / 2.0 - 1.0)
    rn = rho + dt * grid.divergence(a * g)
    _apply_pins(rn, rho, grid)
    return rn


def step_pressure_a(phi, grid: Grid1D, dt, p, reg: RegFunctions):
    """One explicit step of the regularized pressure equation."""
    g = grid.face_gradient(phi)
    a = reg.varphi(np.abs(g))
    gc = grid.center_gradient(phi)
    div = grid.divergence(a * g)
    pn = phi + dt * ((p - 2.0) / (p - 1.0) * phi * div + reg.psi(np.abs(gc)))
    _apply_pins(pn, phi, grid)
    return pn


@dataclass
class ParabolicRun:
    """History of one time-stepped flow: snapshots (with the previous step
    retained so u_t uses the stepper's own backward difference)."""

    kind: str             # 'A' | 'A-pressure' | 'B' | 'B-reg'
    grid: Grid1D
    p: float
    n: int
    times: list = field(default_factory=list)          # absolute times
    fields: list = field(default_factory=list)
    fields_prev: list = field(default_factory=list)
    dts: list = field(default_factory=list)
    t_birth: float = 0.0
    eps: float = 0.0
    delta: float = 1e-10
    area_factor: float = 1.0   # sphere area for radial grids, 1 for lines
    log: list = field(default_factory=list)

    def elapsed(self):
        return np.asarray(self.times) - self.t_birth

    def time_derivative(self, k):
        return (self.fields[k] - self.fields_prev[k]) / self.dts[k]

    def mass(self, k=None, power=None):
        """integral of field^power (power defaults to 1 for density runs)."""
        vals = self.fields[-1 if k is None else k]
        if power is not None:
            vals = vals ** power
        return self.grid.integrate(vals, self.area_factor)


def run_flow(kind, grid: Grid1D, initial, p, t_end, n=1, n_samples=20,
             t_birth=0.0, eps=1e-3, delta=1e-10, reg=None, cfl=0.4,
             stepper="explicit", area_factor=1.0, dirichlet_fn=None,
             max_steps=2_000_000):
    """Drive a flow from `initial` over elapsed time t_end, sampling
    n_samples states (evenly in elapsed time, never at 0).

    dirichlet_fn(t), when given, supplies the right-end pin each step (the
    grid bc must be 'noflux-dirichlet' or 'dirichlet').

    B-reg and A-pressure carry zeroth-order |grad .|-terms, so the step also
    respects an advective constraint dt <= cfl h / max|dH/d(grad)| besides
    the diffusive one.
    """
    v = np.asarray(initial, float).copy()
    run = ParabolicRun(kind=kind, grid=grid, p=p, n=n, t_birth=t_birth,
                       eps=eps, delta=delta, area_factor=area_factor)
    sample_ts = t_birth + t_end * (np.arange(1, n_samples + 1) / n_samples)
    t = t_birth
    next_k = 0
    steps = 0
    while t < t_birth + t_end - 1e-15 and steps < max_steps:
        g = grid.face_gradient(v)
        dt_adv = math.inf
        # the stability coefficient is the flux derivative dF/dg, which for
        # F = (g^2+reg)^{p/2-1} g is (g^2+reg)^{p/2-2} ((p-1) g^2 + reg) --
        # up to (p-1)x the diffusivity itself when p > 2
        if kind == "A":
            f = g * g + delta
            coef = f ** (p / 2.0 - 2.0) * ((p - 1.0) * g * g + delta)
        elif kind == "B-reg":
            fe = g * g + eps
            coef = fe ** (p / 2.0 - 2.0) * ((p - 1.0) * g * g + eps)
            dt_adv = cfl * grid.h / max(float(np.max(p * fe ** ((p - 1.0) / 2.0))), 1e-30)
        elif kind == "B":
            rho_face = np.ones(len(v) + 1)
            rho_face[1:-1] = 0.5 * (v[1:] + v[:-1])
            s2 = (g / rho_face) ** 2
            coef = (s2 + delta) ** (p / 2.0 - 2.0) * ((p - 1.0) * s2 + delta)
        elif kind == "A-pressure":
            ag = np.abs(g)
            coef = reg.varphi(ag) * reg.zeta(ag) * np.maximum(
                abs((p - 2.0) / (p - 1.0)) * np.max(np.abs(v)), 1.0)
            dpsi = p / (p - 1.0) * (ag * reg.varphi(ag) * (1.0 + np.abs(reg.zeta(ag) - 1.0)))
            dt_adv = cfl * grid.h / max(float(np.max(dpsi)), 1e-30)
        else:
            raise ParabolicError(f"unknown kind {kind!r}")
        dt = min(cfl_dt(grid, coef, cfl), dt_adv)
        if not math.isfinite(dt) or dt <= 0:
            dt = cfl * grid.h ** 2
        dt = min(dt, t_birth + t_end - t)
        if next_k < len(sample_ts):
            dt = min(dt, max(sample_ts[next_k] - t, 1e-3 * dt))
        prev = v
        if kind == "A":
            v = (step_equation_a_implicit if stepper == "implicit" else
                 step_equation_a)(v, grid, dt, p, delta)
        elif kind == "B-reg":
            v = step_equation_b_reg(v, grid, dt, p, eps)
        elif kind == "B":
            v = step_density_b(v, grid, dt, p, delta)
        elif kind == "A-pressure":
            v = step_pressure_a(prev, grid, dt, p, reg)
        if dirichlet_fn is not None:
            pin = dirichlet_fn(t + dt)
            if np.ndim(pin) == 0:
                v[-1] = pin
            else:
                v[0], v[-1] = pin[0], pin[1]
        if not np.all(np.isfinite(v)):
            raise ParabolicError(f"{kind} step produced non-finite values at t={t:g}")
        t += dt
        steps += 1
        if next_k < len(sample_ts) and t >= sample_ts[next_k] - 1e-12:
            run.times.append(t)
            run.fields.append(v.copy())
            run.fields_prev.append(prev.copy())
            run.dts.append(dt)
            next_k += 1
    if steps >= max_steps:
        raise ParabolicError("step budget exhausted")
    run.log.append({"steps": steps, "final_t": t})
    return run


def ordered_initial_preserved(kind, grid, init_lo, init_hi, p, t_end, **kw):
    """Order preservation diagnostic: evolve ordered data, report the worst
    pointwise violation."""
    r1 = run_flow(kind, grid, init_lo, p, t_end, **kw)
    r2 = run_flow(kind, grid, init_hi, p, t_end, **kw)
    worst = 0.0
    for f1, f2 in zip(r1.fields, r2.fields):
        worst = max(worst, float(np.max(f1 - f2)))
    return worst


# ---------------------------------------------------------------------------
# Harnack checks

def bar_beta(p, n):
    """beta-bar of the global estimate for equation A."""
    beta = barenblatt_beta(p, n)
    if p > 2.0:
        return (p - 1.0) * beta
    return beta


def _interior_mask(run: ParabolicRun, vals, collar_cells, support_rel):
    m = np.ones(len(vals), bool)
    c = collar_cells
    if c > 0:
        m[:c] = False
        m[-c:] = False
    if support_rel is not None:
        m &= vals >= support_rel * np.max(vals)
    return m


def harnack_check(run: ParabolicRun, estimate_id, n, tol, collar_cells=3,
                  support_rel=None, support_collar_cells=0, absolute_time=False):
    """Worst-point LHS against the sharp bound, per sampled time.

    par-global (kind A, field v):   |grad v|^p/v^2 - v_t/v   vs  n beta-bar/t
    lyp1      (kind B, density):    |grad u|^p + u_t         vs  n/(pt)
    lyp2      (kind B/B-reg):       |grad u| + u_t           vs  (n-1)/t
    globalapproxge (kind B-reg):    (|grad u|^2+eps)^{p/2} + u_t  vs  n/(pt)

    Times are measured from the run's birth unless absolute_time is set
    (exact-solution sharpness runs).
    """
    p = run.p
    grid = run.grid
    ts, lhs_w, bound, lhs_min = [], [], [], []
    for k in range(len(run.times)):
        t_rel = run.times[k] - (0.0 if absolute_time else run.t_birth)
        if t_rel <= 0:
            continue
        vals = run.fields[k]
        vt = run.time_derivative(k)
        if estimate_id == "par-global":
            if run.kind != "A":
                raise ParabolicError("par-global applies to kind A runs")
            mask = _interior_mask(run, vals, collar_cells, support_rel)
            if support_collar_cells and support_rel is not None:
                inside = vals >= support_rel * np.max(vals)
                edge = np.where(inside[:-1] != inside[1:])[0]
                for e in edge:
                    lo = max(0, e - support_collar_cells)
                    hi = min(len(vals), e + support_collar_cells + 1)
                    mask[lo:hi] = False
            gv = grid.center_gradient(vals)
            lhs = np.abs(gv) ** p / vals ** 2 - vt / vals
            b = n * bar_beta(p, n) / t_rel
        elif estimate_id in ("lyp1", "lyp2", "globalapproxge"):
            if run.kind == "B":   # density run: u = -log rho
                rho = vals
                u_t = -vt / rho
                gu = grid.center_gradient(-np.log(rho))
            elif run.kind == "B-reg":
                u_t = vt
                gu = grid.center_gradient(vals)
            else:
                raise ParabolicError(f"{estimate_id} applies to kind B runs")
            mask = _interior_mask(run, vals if run.kind == "B" else -vals,
                                  collar_cells, support_rel)
            if estimate_id == "lyp1":
                lhs = np.abs(gu) ** p + u_t
                b = n / (p * t_rel)
            elif estimate_id == "globalapproxge":
                lhs = (gu * gu + run.eps) ** (p / 2.0) + u_t
                b = n / (p * t_rel)
            else:
                lhs = np.abs(gu) + u_t
                b = (n - 1.0) / t_rel
        else:
            raise ParabolicError(f"unknown estimate id {estimate_id!r}")
        ts.append(t_rel)
        lhs_w.append(float(np.max(lhs[mask])))
        lhs_min.append(float(np.min(lhs[mask])))
        bound.append(b)
    return HarnackReport(estimate_id=estimate_id, times=np.array(ts),
                         lhs_worst=np.array(lhs_w), bound=np.array(bound),
                         tol=tol, params={"p": p, "n": n, "kind": run.kind,
                                          "eps": run.eps,
                                          "lhs_min": np.array(lhs_min)})


# ---------------------------------------------------------------------------
# localized estimate (the parabolic analogue of the interior bound)

def localized_constants(p, n, K, R, alpha):
    """The printed constants of the localized estimate for 1 < p < 2."""
    if not (1.0 < p < 2.0):
        raise ParabolicError("localized estimate needs 1 < p < 2")
    if alpha <= 1.0:
        raise ParabolicError("needs alpha > 1")
    C1 = 40.0 * (n + p - 2.0) * (1.0 + K * R) - 20.0
    C2 = C1 + 100.0 + (20.0 + (2.0 - p) * (alpha - 1.0) / alpha) ** 2 \
        * n * alpha ** 2 / (4.0 * (alpha - 1.0)) + 50.0 * (2.0 - p) / (p - 1.0)
    C2p = C2 + n * (2.0 - p) ** 2
    C3 = p / 2.0 * (4.0 * n * alpha ** 2 * (2.0 - p)) ** ((2.0 - p) / 2.0)
    return {"C1": C1, "C2": C2, "C2_prime": C2p, "C3": C3}


def localized_bound(p, n, K, R, alpha, t):
    c = localized_constants(p, n, K, R, alpha)
    term1 = (8.0 * n * alpha ** 2 * (c["C2_prime"] / R ** 2
                                     + c["C3"] / t ** (2.0 / p))) ** (p / 2.0)
    term2 = (4.0 * n * (n - 1.0) * K ** 2) ** (p / 2.0) \
        * (alpha / (alpha - 1.0)) ** p
    return max(term1, term2)


def localized_check(run: ParabolicRun, n, alpha, K, R, x0=0.0, tol=0.0,
                    ut_tol=1e-8):
    """sup_{B(x0,R/2)} (|grad u|^p + alpha u_t) against the localized bound,
    at every sampled time (run-relative clock). Requires u_t <= 0 along the
    run, which is verified first."""
    p = run.p
    if run.kind != "B-reg":
        raise ParabolicError("localized check expects a B-reg run")
    grid = run.grid
    ts, lhs_w, bounds = [], [], []
    ball = np.abs(grid.x - x0) <= R / 2.0
    for k in range(len(run.times)):
        t_rel = run.times[k] - run.t_birth
        ut = run.time_derivative(k)
        if float(np.max(ut)) > ut_tol:
            raise ParabolicError(f"u_t <= 0 hypothesis violated at t={t_rel:g} "
                                 f"(max u_t = {np.max(ut):.2e})")
        gu = grid.center_gradient(run.fields[k])
        lhs = np.abs(gu) ** p + alpha * ut
        ts.append(t_rel)
        lhs_w.append(float(np.max(lhs[ball])))
        bounds.append(localized_bound(p, n, K, R, alpha, t_rel))
    rep = HarnackReport(estimate_id="loc-estfin", times=np.array(ts),
                        lhs_worst=np.array(lhs_w), bound=np.array(bounds),
                        tol=tol, params={"p": p, "n": n, "alpha": alpha,
                                         "K": K, "R": R,
                                         **localized_constants(p, n, K, R, alpha)})
    return rep
