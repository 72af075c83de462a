"""Discrete scalar fields and the anisotropy tensor A = id + (p-2) du (x) du / f."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


class FieldError(ValueError):
    pass


@dataclass
class ScalarField:
    """A scalar function sampled on a radial mesh, a 1D line, or a 2D grid.

    layout 'radial': nodes are arclengths `s` on a warped metric; optional
    closed-form evaluators (value/deriv) ride along so that transported
    fields keep exact first derivatives.
    layout 'grid2d': uniform spacing h on a rectangle, with `mask` marking
    the active (interior/unknown) nodes of a possibly non-rectangular domain.
    """

    layout: str
    values: np.ndarray
    p: float
    t: Optional[float] = None
    # radial / line layouts
    s: Optional[np.ndarray] = None
    metric: object = None
    value_fn: Optional[Callable] = None
    deriv_fn: Optional[Callable] = None
    # grid2d layout
    h: Optional[float] = None
    origin: tuple = (0.0, 0.0)
    mask: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.layout not in ("radial", "grid2d"):
            raise FieldError(f"unknown layout {self.layout!r}")
        if not np.all(np.isfinite(self.values)):
            raise FieldError("field values must be finite")
        if self.layout == "radial":
            if self.s is None or len(self.s) != len(self.values):
                raise FieldError("radial field needs matching s-mesh")
            ds = np.diff(self.s)
            if np.any(ds <= 0):
                raise FieldError("s-mesh must be strictly increasing")
        if self.layout == "grid2d" and (self.h is None or self.h <= 0):
            raise FieldError("grid2d field needs positive spacing h")

    # -- gradients ---------------------------------------------------------

    def radial_derivative(self):
        """du/ds on the mesh: exact when an evaluator is attached, otherwise
        2nd-order centered differences (one-sided at the ends)."""
        if self.deriv_fn is not None:
            return np.asarray(self.deriv_fn(self.s), float)
        return np.gradient(self.values, self.s, edge_order=2)

    def require_positive(self):
        if np.any(self.values <= 0):
            raise FieldError("field must be positive")

    def grid_coords(self):
        if self.layout != "grid2d":
            raise FieldError("not a 2d grid field")
        ny, nx = self.values.shape
        x = self.origin[0] + self.h * np.arange(nx)
        y = self.origin[1] + self.h * np.arange(ny)
        return np.meshgrid(x, y)


def radial_field(s, values, p, metric=None, value_fn=None, deriv_fn=None, t=None, meta=None):
    return ScalarField("radial", np.asarray(values, float), p, t=t,
                       s=np.asarray(s, float), metric=metric,
                       value_fn=value_fn, deriv_fn=deriv_fn, meta=meta or {})


def grid_field(values, h, p, origin=(0.0, 0.0), mask=None, t=None, meta=None):
    return ScalarField("grid2d", np.asarray(values, float), p, t=t, h=h,
                       origin=origin, mask=mask, meta=meta or {})


class AnisotropyTensor:
    """The pair A^{ij} = g^{ij} + (p-2) u^i u^j / f and its inverse
    a_{ij} = g_{ij} - (p-2)/(p-1) u_i u_j / f, on flat R^dim.

    A has eigenvalues {p-1, 1, ..., 1} (eigenvector grad u), so it is
    positive definite exactly when p > 1 and f > 0.
    """

    def __init__(self, grad_u, p, f=None):
        g = np.asarray(grad_u, float)
        self.p = float(p)
        self.f = float(f) if f is not None else float(np.dot(g, g))
        if self.f <= 0:
            raise FieldError("anisotropy tensor needs f > 0")
        self.dim = len(g)
        self.grad = g

    def A(self):
        outer = np.outer(self.grad, self.grad) / self.f
        return np.eye(self.dim) + (self.p - 2.0) * outer

    def a(self):
        outer = np.outer(self.grad, self.grad) / self.f
        return np.eye(self.dim) - (self.p - 2.0) / (self.p - 1.0) * outer

    def norm_A_sq(self, T):
        """|T|_A^2 = A^{ik} A^{jl} T_{ij} T_{kl} = <T, A T A>_F."""
        T = np.asarray(T, float)
        A = self.A()
        return float(np.tensordot(T, A @ T @ A))

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.A())
