"""Report records shared by the verification modules, plus JSON/CSV writers.

Floats are serialized with 17 significant digits so identical configs give
byte-identical artifacts.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

FLOAT_FMT = "%.17g"


def fnum(x):
    """Canonical float formatting (17 significant digits)."""
    return FLOAT_FMT % float(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(obj[k]) for k in obj}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(fnum(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


@dataclass
class EstimateReport:
    """One verified inequality: pass iff margin = rhs - lhs >= -tol."""

    name: str
    lhs: float
    rhs: float
    tol: float = 0.0
    worst_point: Optional[tuple] = None
    params: dict = field(default_factory=dict)

    @property
    def margin(self):
        return self.rhs - self.lhs

    @property
    def passed(self):
        return self.margin >= -self.tol

    def to_dict(self):
        d = asdict(self)
        d["margin"] = self.margin
        d["pass"] = bool(self.passed)
        d["kind"] = "estimate"
        return _jsonable(d)


@dataclass
class HarnackReport:
    """Worst-point differential-Harnack margins along a parabolic run."""

    estimate_id: str
    times: np.ndarray
    lhs_worst: np.ndarray
    bound: np.ndarray
    tol: float
    params: dict = field(default_factory=dict)

    @property
    def margins(self):
        return self.bound - self.lhs_worst

    @property
    def min_margin(self):
        return float(np.min(self.margins)) if len(self.times) else 0.0

    @property
    def passed(self):
        return self.min_margin >= -self.tol

    def to_dict(self):
        return _jsonable({
            "kind": "harnack",
            "estimate_id": self.estimate_id,
            "times": self.times,
            "lhs_worst": self.lhs_worst,
            "bound": self.bound,
            "margin": self.margins,
            "min_margin": self.min_margin,
            "tol": self.tol,
            "params": self.params,
            "pass": bool(self.passed),
        })


@dataclass
class EntropySeries:
    """Mass, Nash-type entropy N_p, its derivative F_p, the energy Fbar and
    the scale-normalized W_p along a run of the second parabolic equation."""

    p: float
    n: int
    times: np.ndarray
    mass: np.ndarray
    N_p: np.ndarray
    F_p: np.ndarray
    Fbar: np.ndarray
    W_p: np.ndarray
    rhs: np.ndarray          # entropy-formula dissipation integral (>= 0 flat)
    dWdt: np.ndarray
    norm_const: float
    params: dict = field(default_factory=dict)

    CSV_COLUMNS = ("t", "mass", "N_p", "F_p", "Fbar", "W_p", "RHS", "dWdt")

    def to_csv_rows(self):
        rows = []
        for k in range(len(self.times)):
            rows.append([self.times[k], self.mass[k], self.N_p[k], self.F_p[k],
                         self.Fbar[k], self.W_p[k], self.rhs[k], self.dWdt[k]])
        return rows

    def to_dict(self):
        return _jsonable({
            "kind": "entropy_series",
            "p": self.p, "n": self.n,
            "times": self.times, "mass": self.mass, "N_p": self.N_p,
            "F_p": self.F_p, "Fbar": self.Fbar, "W_p": self.W_p,
            "rhs": self.rhs, "dWdt": self.dWdt,
            "norm_const": self.norm_const, "params": self.params,
        })


@dataclass
class ReportBundle:
    manifest: dict
    reports: list

    @property
    def overall_pass(self):
        ok = True
        for r in self.reports:
            d = r.to_dict() if hasattr(r, "to_dict") else r
            if "pass" in d:
                ok = ok and bool(d["pass"])
        return ok

    def to_dict(self):
        return {
            "manifest": _jsonable(self.manifest),
            "reports": [r.to_dict() if hasattr(r, "to_dict") else _jsonable(r)
                        for r in self.reports],
            "overall_pass": bool(self.overall_pass),
        }

    def write_json(self, path):
        with open(path, "w", newline="\n") as f:
            json.dump(self.to_dict(), f, indent=1, sort_keys=True)
            f.write("\n")


def config_hash(cfg: dict):
    canon = json.dumps(_jsonable(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def write_csv(path, header, rows):
    """Deterministic CSV: fixed newline, canonical float format."""
    with open(path, "w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(fnum(v) if isinstance(v, (float, np.floating)) else str(v)
                             for v in row) + "\n")
