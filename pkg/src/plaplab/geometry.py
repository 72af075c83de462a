"""Rotationally symmetric metrics g = ds^2 + w(s)^2 g_{S^{n-1}}.

Curvature, ball volumes, volume growth and the end-structure criteria
(p-nonparabolicity, the sup-quotient V(r)) that decide whether the p -> 1
continuation produces a proper solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad


class GeometryError(ValueError):
    pass


def sphere_area(n):
    """Area of the unit sphere S^{n-1} in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def unit_ball_volume(n):
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


@dataclass(frozen=True)
class WarpedMetric:
    """Complete rotationally symmetric metric described by its warp function.

    kind 'pole': w(0) = 0, w'(0) = 1 (smooth pole at s = 0).
    kind 'end':  defined for s >= s0 > 0 only (a single end with compact
    boundary at s0); no pole conditions are imposed.

    w, dw, ddw are closed-form evaluators; curvature uses dw/ddw exactly,
    never numerical differentiation.
    """

    name: str
    n: int
    w: Callable[[np.ndarray], np.ndarray]
    dw: Callable[[np.ndarray], np.ndarray]
    ddw: Callable[[np.ndarray], np.ndarray]
    kind: str = "pole"
    s0: float = 0.0
    # optional exp-scale a with w ~ c*e^{a s}: lets tail quadratures rescale
    growth_hint: str = "power"  # 'power' | 'exp' | 'linear'
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 2:
            raise GeometryError("dimension must be >= 2")
        if self.kind not in ("pole", "end"):
            raise GeometryError(f"unknown kind {self.kind!r}")
        if self.kind == "pole":
            if abs(float(self.w(0.0))) > 1e-12 or abs(float(self.dw(0.0)) - 1.0) > 1e-12:
                raise GeometryError("pole metric needs w(0)=0, w'(0)=1")
        elif self.s0 <= 0:
            raise GeometryError("end metric needs s0 > 0")

    def domain_start(self):
        return self.s0 if self.kind == "end" else 0.0

    def check_positive(self, s_lo, s_hi, samples=512):
        s = np.linspace(max(s_lo, self.domain_start()), s_hi, samples)
        if self.kind == "pole":
            s = s[s > 0]
        vals = self.w(s)
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
            raise GeometryError(f"warp function not positive/finite on [{s_lo}, {s_hi}]")


def builtin_metric(name, n=3, K=1.0, gamma=1.5):
    """Construct one of the named model metrics.

    euclidean        w = s
    hyperbolic(K)    w = sinh(K s)/K, curvature -K^2 (needs K > 0)
    cigar            n = 2, w = tanh s (nonnegatively curved, linear volume growth)
    power_growth(g)  w = s (1+s^2)^{(g-n)/(2(n-1))}, so V(t) ~ c t^g (needs g > 1)
    neck(K)          end kind, w = cosh(K (s-2)) on s >= 1; boundary sphere at
                     s0 = 1 has negative mean curvature (H_+ = 0 test case)
    """
    if name == "euclidean":
        return WarpedMetric("euclidean", n,
                            w=lambda s: np.asarray(s, float) * 1.0,
                            dw=lambda s: np.ones_like(np.asarray(s, float)),
                            ddw=lambda s: np.zeros_like(np.asarray(s, float)),
                            growth_hint="power", params={})
    if name == "hyperbolic":
        if K <= 0:
            raise GeometryError("hyperbolic needs K > 0")
        return WarpedMetric(f"hyperbolic({K:g})", n,
                            w=lambda s, K=K: np.sinh(K * np.asarray(s, float)) / K,
                            dw=lambda s, K=K: np.cosh(K * np.asarray(s, float)),
                            ddw=lambda s, K=K: K * np.sinh(K * np.asarray(s, float)),
                            growth_hint="exp", params={"K": K})
    if name == "cigar":
        if n != 2:
            raise GeometryError("the cigar is 2-dimensional")
        return WarpedMetric("cigar", 2,
                            w=lambda s: np.tanh(np.asarray(s, float)),
                            dw=lambda s: 1.0 / np.cosh(np.asarray(s, float)) ** 2,
                            ddw=lambda s: -2.0 * np.tanh(np.asarray(s, float))
                            / np.cosh(np.asarray(s, float)) ** 2,
                            growth_hint="linear", params={})
    if name == "power_growth":
        if gamma <= 1:
            raise GeometryError("power_growth needs gamma > 1")
        q = (gamma - n) / (2.0 * (n - 1))

        def w(s, q=q):
            s = np.asarray(s, float)
            return s * (1.0 + s * s) ** q

        def dw(s, q=q):
            s = np.asarray(s, float)
            return (1.0 + s * s) ** (q - 1) * (1.0 + (1.0 + 2.0 * q) * s * s)

        def ddw(s, q=q):
            s = np.asarray(s, float)
            return 2.0 * q * s * (1.0 + s * s) ** (q - 2) * (3.0 + (1.0 + 2.0 * q) * s * s)

        return WarpedMetric(f"power_growth({gamma:g})", n, w=w, dw=dw, ddw=ddw,
                            growth_hint="power", params={"gamma": gamma})
    if name == "neck":
        if K <= 0:
            raise GeometryError("neck needs K > 0")
        return WarpedMetric(f"neck({K:g})", n,
                            w=lambda s, K=K: np.cosh(K * (np.asarray(s, float) - 2.0)),
                            dw=lambda s, K=K: K * np.sinh(K * (np.asarray(s, float) - 2.0)),
                            ddw=lambda s, K=K: K * K * np.cosh(K * (np.asarray(s, float) - 2.0)),
                            kind="end", s0=1.0, growth_hint="exp", params={"K": K})
    raise GeometryError(f"unknown metric {name!r}")


# ---------------------------------------------------------------------------
# curvature

def curvature_tensors(m: WarpedMetric, s):
    """Radial/spherical sectional curvatures and Ricci eigenvalues at s.

    Warped product over S^{n-1}: radial planes have curvature -w''/w,
    spherical planes (1 - w'^2)/w^2; Ricci eigenvalues are
    -(n-1) w''/w (radial) and -w''/w + (n-2)(1-w'^2)/w^2 (spherical).
    """
    s = np.asarray(s, float)
    w, dw, ddw = m.w(s), m.dw(s), m.ddw(s)
    k_rad = -ddw / w
    k_sph = (1.0 - dw * dw) / (w * w) if m.n > 2 else k_rad
    ric_rad = (m.n - 1) * k_rad
    ric_sph = k_rad + (m.n - 2) * k_sph
    return k_rad, k_sph, ric_rad, ric_sph


def curvature_bounds(m: WarpedMetric, s_lo, s_hi, samples=2001):
    """Sampled inf/sup of sectional curvatures and Ricci eigenvalues on [s_lo, s_hi].

    Pole metrics are sampled from max(s_lo, 1e-3) to dodge the 0/0 at the pole
    (both sectional curvatures share the same smooth limit there).
    """
    lo = max(s_lo, m.domain_start())
    if m.kind == "pole":
        lo = max(lo, 1e-3)
    if not (lo < s_hi):
        raise GeometryError(f"interval [{s_lo}, {s_hi}] outside metric domain")
    s = np.linspace(lo, s_hi, samples)
    k_rad, k_sph, ric_rad, ric_sph = curvature_tensors(m, s)
    sec = np.concatenate([k_rad, np.atleast_1d(k_sph)])
    ric = np.concatenate([np.atleast_1d(ric_rad), np.atleast_1d(ric_sph)])
    return {
        "sec_min": float(np.min(sec)), "sec_max": float(np.max(sec)),
        "ric_min": float(np.min(ric)), "ric_max": float(np.max(ric)),
    }


def sectional_lower_K(m, s_lo, s_hi):
    """K >= 0 with K_M >= -K^2 on the interval (Thm-1.1 convention)."""
    b = curvature_bounds(m, s_lo, s_hi)
    return math.sqrt(max(0.0, -b["sec_min"]))


def ricci_lower_kappa(m, s_lo, s_hi):
    """kappa >= 0 with Rc >= -(n-1) kappa g on the interval (barrier convention)."""
    b = curvature_bounds(m, s_lo, s_hi)
    return max(0.0, -b["ric_min"] / (m.n - 1))


# ---------------------------------------------------------------------------
# volume

def ball_volume(m: WarpedMetric, t):
    """V(t) = area(S^{n-1}) * int_0^t w^{n-1} ds by adaptive quadrature."""
    a = m.domain_start()
    if t < a:
        raise GeometryError("radius below the metric's domain start")
    if t == a:
        return 0.0
    val, err = quad(lambda s: m.w(s) ** (m.n - 1), a, t,
                    epsabs=1e-13, epsrel=1e-12, limit=200)
    if not math.isfinite(val) or (val > 0 and err > 1e-8 * max(val, 1.0)):
        raise GeometryError("ball volume quadrature did not converge")
    return sphere_area(m.n) * val


def end_volume(m: WarpedMetric, t, s0=None):
    """V(Omega cap B(o,t)) for the end Omega = {s >= s0}; s0 defaults to the
    metric's own boundary (0 for pole metrics, i.e. the full ball)."""
    s0 = m.domain_start() if s0 is None else s0
    if t <= s0:
        return 0.0
    val, _ = quad(lambda s: m.w(s) ** (m.n - 1), s0, t,
                  epsabs=1e-13, epsrel=1e-12, limit=200)
    return sphere_area(m.n) * val


@dataclass
class VolumeGrowthReport:
    metric: str
    p: float
    t_samples: np.ndarray
    V: np.ndarray
    v_growth: np.ndarray        # V(r) at r = t_samples/2 convention of the caller
    nonparabolic: bool
    integral: float             # finite value when convergent, inf otherwise

    def check_invariants(self):
        assert np.all(np.diff(self.V) > 0), "V must be strictly increasing"
        assert np.all(self.v_growth >= 0)


def _decay_exponent(g, T):
    """Local decay exponent  -dlog g/dlog t  of g at T, by log-differencing."""
    g1, g2 = g(T), g(2.0 * T)
    if g1 <= 0 or g2 <= 0:
        return math.inf
    return -math.log(g2 / g1) / math.log(2.0)


def nonparabolicity(m: WarpedMetric, p, t0=1.0, s0=None, tol=1e-8, max_doublings=40):
    """Decide convergence of  int_{t0}^inf (t / V(Omega cap B(o,t)))^{1/(p-1)} dt.

    Geometric tail refinement: T doubles until two successive tail-extrapolated
    totals agree to tol; divergence is declared when the integrand has a
    nonzero limit or local decay exponent <= 1.
    """
    if p <= 1:
        raise GeometryError("nonparabolicity needs p > 1")
    if t0 <= m.domain_start():
        raise GeometryError("t0 must exceed the end's inner radius")

    def integrand(t):
        V = end_volume(m, t, s0=s0)
        return (t / V) ** (1.0 / (p - 1.0))

    # classify the tail first
    T = max(8.0 * t0, 16.0)
    for _ in range(12):
        e = _decay_exponent(integrand, T)
        e2 = _decay_exponent(integrand, 2.0 * T)
        if abs(e2 - e) < 0.05 * max(1.0, abs(e)):
            break
        T *= 2.0
    else:
        raise GeometryError("tail exponent not classifiable")
    if e2 <= 1.0 + 1e-3:
        return {"converges": False, "value": math.inf, "exponent": e2}

    total_prev = None
    body, _ = quad(integrand, t0, T, epsabs=1e-13, epsrel=1e-11, limit=400)
    for _ in range(max_doublings):
        e_loc = max(_decay_exponent(integrand, T), 1.0 + 1e-3)
        tail = integrand(T) * T / (e_loc - 1.0)
        total = body + tail
        if total_prev is not None and abs(total - total_prev) < tol * max(1.0, abs(total)):
            return {"converges": True, "value": total, "exponent": e_loc}
        total_prev = total
        piece, _ = quad(integrand, T, 2.0 * T, epsabs=1e-13, epsrel=1e-11, limit=400)
        body += piece
        T *= 2.0
    raise GeometryError("nonparabolicity refinement did not settle")


def v_growth(m: WarpedMetric, r, s0=None, tol=1e-7, max_doublings=40):
    """V(r) = sup_{t >= 2r} t / V(Omega cap B(o,t)), with a certified tail.

    The quotient g(t) = t/V is sampled on doubling windows; once g is
    decreasing at the frontier the sup is certified, otherwise the finite
    limit is Richardson-extrapolated from the doubling sequence.
    """
    if r <= 0:
        raise GeometryError("r must be positive")
    def g(t):
        return t / end_volume(m, t, s0=s0)

    T0 = 2.0 * r
    sup = -math.inf
    T = T0
    for _ in range(max_doublings):
        ts = np.geomspace(T, 2.0 * T, 33)
        vals = np.array([g(t) for t in ts])
        sup = max(sup, float(vals.max()))
        if vals[-1] < vals[0] and g(4.0 * T) < vals[-1]:
            return sup  # decreasing frontier: tail below current sup
        gT, g2T = g(2.0 * T), g(4.0 * T)
        if abs(g2T - gT) < tol * max(abs(g2T), 1e-30):
            # increasing to a finite limit ~ g_inf; eliminate the 1/T term
            return max(sup, g2T + (g2T - gT))
        T *= 2.0
    raise GeometryError("v_growth tail not classifiable")
