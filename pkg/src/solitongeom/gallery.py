"""Closed-form builders: canonical self-shrinkers and spiral cylinders over ``Gamma(t) = (d + b(t))(cos t, sin t)``.

A radial profile ``b`` supplies exact ``b, b', b''``.  The admissible
profiles satisfy

    (i)   b(t) -> 0 as t -> +inf
    (ii)  b(t) -> m in (0, inf] as t -> -inf
    (iii) b' < 0
    (iv)  b >= |b'|
    (v)   |b'| < 1

and then every tangent line of Gamma stays at distance >= 1 from the origin.
The checks below evaluate each step of that argument on grids.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from solitongeom.errors import BadDimension, ConditionsViolated
from solitongeom.surface import (Circle, Cylinder, Line, Plane, Sphere, SurfaceSpec,
                                 _check_orientation, _stack_jet)

# ---------------------------------------------------------------------------
# radial profiles


class RadialProfile:
    """Base class: subclasses provide ``b``, ``db``, ``ddb`` and the two end limits."""

    family: ClassVar[str] = "custom"
    limit_plus: float | None = None
    limit_minus: float | None = None

    def b(self, t):
        raise NotImplementedError

    def db(self, t):
        raise NotImplementedError

    def ddb(self, t):
        raise NotImplementedError

    def params(self):
        return {}

    def describe(self):
        items = ",".join(f"{k}={v}" for k, v in self.params().items())
        return f"{self.family}:{items}" if items else self.family


@dataclass(frozen=True)
class ArctanProfile(RadialProfile):
    """``b(t) = (m/pi)(pi/2 - arctan(a t))`` with ``m > 0, 0 < a <= 1``."""

    m: float = 1.0
    a: float = 1.0
    family: ClassVar[str] = "arctan"

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError("arctan profile needs m > 0")
        if not 0 < self.a <= 1:
            raise ValueError("arctan profile needs 0 < a <= 1")

    @property
    def limit_plus(self):
        return 0.0

    @property
    def limit_minus(self):
        return self.m

    def b(self, t):
        # arctan2(1, x) == pi/2 - arctan(x) without cancellation for large x
        return self.m / math.pi * np.arctan2(1.0, self.a * np.asarray(t, dtype=float))

    def db(self, t):
        at = self.a * np.asarray(t, dtype=float)
        return -self.m * self.a / (math.pi * (1.0 + at * at))

    def ddb(self, t):
        at = self.a * np.asarray(t, dtype=float)
        return 2.0 * self.m * self.a**2 * at / (math.pi * (1.0 + at * at) ** 2)

    def params(self):
        return {"m": self.m, "a": self.a}


@dataclass(frozen=True)
class ExpProfile(RadialProfile):
    """``b(t) = e^{-t}``: the unbounded (m = inf) member."""

    family: ClassVar[str] = "exp"
    limit_plus: ClassVar[float] = 0.0
    limit_minus: ClassVar[float] = math.inf

    def b(self, t):
        return np.exp(-np.asarray(t, dtype=float))

    def db(self, t):
        return -np.exp(-np.asarray(t, dtype=float))

    def ddb(self, t):
        return np.exp(-np.asarray(t, dtype=float))


@dataclass(frozen=True)
class ConstantProfile(RadialProfile):
    value: float = 0.0
    family: ClassVar[str] = "constant"

    @property
    def limit_plus(self):
        return self.value

    @property
    def limit_minus(self):
        return self.value

    def b(self, t):
        return np.full(np.shape(t), float(self.value))

    def db(self, t):
        return np.zeros(np.shape(t))

    def ddb(self, t):
        return np.zeros(np.shape(t))

    def params(self):
        return {"value": self.value}


@dataclass(frozen=True)
class PolynomialProfile(RadialProfile):
    """``b(t) = sum_k coeffs[k] t^k``; used for comparison curves outside the family."""

    coeffs: tuple = (0.0,)
    family: ClassVar[str] = "poly"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    def _poly(self, k=0):
        p = Polynomial(self.coeffs)
        return p.deriv(k) if k else p

    def b(self, t):
        return self._poly()(np.asarray(t, dtype=float))

    def db(self, t):
        return self._poly(1)(np.asarray(t, dtype=float))

    def ddb(self, t):
        return self._poly(2)(np.asarray(t, dtype=float))

    def params(self):
        return {"coeffs": ";".join(repr(c) for c in self.coeffs)}


@dataclass(frozen=True)
class TableProfile(RadialProfile):
    """Profile interpolated from a table by a not-a-knot cubic spline."""

    t: tuple = ()
    values: tuple = ()
    family: ClassVar[str] = "table"
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 4:
            raise ValueError("table profile needs matching 1-D arrays of at least 4 samples")
        if np.any(np.diff(t) <= 0):
            raise ValueError("table abscissae must be strictly increasing")
        object.__setattr__(self, "t", tuple(t))
        object.__setattr__(self, "values", tuple(v))
        object.__setattr__(self, "_spline", CubicSpline(t, v))

    def b(self, t):
        return self._spline(np.asarray(t, dtype=float))

    def db(self, t):
        return self._spline(np.asarray(t, dtype=float), 1)

    def ddb(self, t):
        return self._spline(np.asarray(t, dtype=float), 2)

    def params(self):
        return {"samples": len(self.t)}


# ---------------------------------------------------------------------------
# spiral curve and cylinder


@dataclass(frozen=True)
class SpiralCurve:
    """``Gamma(t) = (d + b(t))(cos t, sin t)``."""

    profile: RadialProfile
    d: float = 1.0

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError("base radius d must be positive")

    def radius(self, t):
        return self.d + self.profile.b(t)

    def point(self, t):
        t = np.asarray(t, dtype=float)
        r = self.radius(t)
        return np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)

    def velocity(self, t):
        t = np.asarray(t, dtype=float)
        r, dr = self.radius(t), self.profile.db(t)
        c, s = np.cos(t), np.sin(t)
        return np.stack([dr * c - r * s, dr * s + r * c], axis=-1)

    def acceleration(self, t):
        t = np.asarray(t, dtype=float)
        r, dr, ddr = self.radius(t), self.profile.db(t), self.profile.ddb(t)
        c, s = np.cos(t), np.sin(t)
        return np.stack([ddr * c - 2 * dr * s - r * c, ddr * s + 2 * dr * c - r * s], axis=-1)

    def speed(self, t):
        return np.hypot(self.radius(t), self.profile.db(t))

    def describe(self):
        return f"{self.profile.describe()},d={self.d}"


@dataclass(frozen=True)
class SpiralCurveSpec(SurfaceSpec):
    """The planar spiral as an n = 1 hypersurface of R^2."""

    curve: SpiralCurve = None
    orientation: str = "inward"
    kind: ClassVar[str] = "spiral-curve"
    n: ClassVar[int] = 1
    ambient_dim: ClassVar[int] = 2

    def __post_init__(self):
        _check_orientation(self.orientation)

    @property
    def default_ranges(self):
        return ((-10.0, 10.0),)

    def _jet(self, u):
        t = u[..., 0]
        p, v, a = self.curve.point(t), self.curve.velocity(t), self.curve.acceleration(t)
        return p, v[..., None, :], a[..., None, :]

    def inward_direction(self, x, u):
        return -np.asarray(x, dtype=float)

    def describe(self):
        return f"{self.kind}:{self.curve.describe()}"


@dataclass(frozen=True)
class SpiralCylinder(SurfaceSpec):
    """``Gamma x R`` in R^3, parameters ``(t, z)``; inward points toward the z-axis."""

    curve: SpiralCurve = None
    orientation: str = "inward"
    kind: ClassVar[str] = "spiral-cylinder"
    vertical: ClassVar[bool] = True

    def __post_init__(self):
        if self.curve is None:
            raise ValueError("spiral cylinder needs a curve")
        _check_orientation(self.orientation)

    @property
    def default_ranges(self):
        return ((-10.0, 10.0), (-1.0, 1.0))

    def _jet(self, u):
        t = u[..., 0]
        p, v, a = self.curve.point(t), self.curve.velocity(t), self.curve.acceleration(t)
        z0, one = np.zeros_like(t), np.ones_like(t)
        return _stack_jet([p[..., 0], p[..., 1], u[..., 1]],
                          [[v[..., 0], v[..., 1], z0], [z0, z0, one]],
                          [[a[..., 0], a[..., 1], z0], [z0, z0, z0], [z0, z0, z0]])

    def inward_direction(self, x, u):
        out = -np.array(x, dtype=float)
        out[..., 2] = 0.0
        return out

    def profile_curve(self):
        return SpiralCurveSpec(curve=self.curve, orientation=self.orientation)

    def describe(self):
        return f"{self.kind}:{self.curve.describe()}"


def spiral_cylinder(profile, d=1.0, orientation="inward"):
    return SpiralCylinder(curve=SpiralCurve(profile, d), orientation=orientation)


# ---------------------------------------------------------------------------
# profile conditions


@dataclass
class ConditionResult:
    name: str
    holds_on_grid: bool
    worst_margin: float
    worst_t: float
    note: str = ""
    fail_boundary_t: float | None = None

    def record(self):
        return {"condition": self.name, "holds_on_grid": self.holds_on_grid,
                "worst_margin": self.worst_margin, "worst_t": self.worst_t,
                "fail_boundary_t": self.fail_boundary_t, "note": self.note}


@dataclass
class ConditionReport:
    profile: str
    conditions: list

    def __getitem__(self, name):
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def all_hold(self):
        return all(c.holds_on_grid for c in self.conditions)

    def records(self):
        return [dict(profile=self.profile, **c.record()) for c in self.conditions]


def _pointwise(name, t, margin, strict):
    ok = margin > 0 if strict else margin >= 0
    k = int(np.argmin(margin))
    bad = np.flatnonzero(~ok)
    boundary = float(t[bad[-1]]) if bad.size else None
    return ConditionResult(name, bool(np.all(ok)), float(margin[k]), float(t[k]),
                           fail_boundary_t=boundary)


def _limit_result(name, profile, T, target):
    """Decay comparison ``|b(T) - L|`` vs ``|b(T/2) - L|`` at one horizon."""
    far, near = float(profile.b(T)), float(profile.b(T / 2))
    if target is None:
        return ConditionResult(name, False, math.nan, T, note="limit unknown for this profile")
    if math.isinf(target):
        margin = far - near
        return ConditionResult(name, bool(margin > 0), margin, T,
                               note=f"unbounded limit (m = inf): b({T:g})={far!r}, b({T / 2:g})={near!r}")
    gap_far, gap_near = abs(far - target), abs(near - target)
    margin = gap_near - gap_far
    return ConditionResult(name, bool(gap_far <= gap_near), margin, T,
                           note=f"|b-L| at {T:g}: {gap_far!r}; at {T / 2:g}: {gap_near!r}")


def profile_conditions_check(profile, t_grid, asymptotic_T=None):
    """Check (i)-(v) for ``profile``.

    (iii)-(v) are pointwise on ``t_grid``; (i)-(ii) compare the distance to
    the limit at ``+-asymptotic_T`` with that at ``+-asymptotic_T/2``.
    Margins are signed, positive meaning satisfied with slack.
    """
    t = np.asarray(t_grid, dtype=float)
    T = float(np.max(np.abs(t))) if asymptotic_T is None else float(asymptotic_T)
    if T < np.max(np.abs(t)):
        raise ValueError("asymptotic_T must be at least max|t_grid|")
    b, db = profile.b(t), profile.db(t)
    m = profile.limit_minus
    cond_ii = _limit_result("ii", profile, -T, m)
    if m is not None and not math.isinf(m) and not m > 0:
        cond_ii.holds_on_grid = False
        cond_ii.note += "; limit must be positive"
    conds = [
        _limit_result("i", profile, T, 0.0),
        cond_ii,
        _pointwise("iii", t, -db, strict=True),
        _pointwise("iv", t, b - np.abs(db), strict=False),
        _pointwise("v", t, 1.0 - np.abs(db), strict=True),
    ]
    return ConditionReport(profile.describe(), conds)


# ---------------------------------------------------------------------------
# curvature and tangent lines


def spiral_curvature(curve, t):
    """Signed curvature of Gamma (positive when turning toward the axis)."""
    t = np.asarray(t, dtype=float)
    r, dr, ddr = curve.radius(t), curve.profile.db(t), curve.profile.ddb(t)
    return (r * r + 2 * dr * dr - r * ddr) / (r * r + dr * dr) ** 1.5


@dataclass
class TangentNorm:
    """``|R_t(s)|^2`` for ``R_t(s) = Gamma(t) + s Gamma'(t)`` in two algebraic forms."""

    raw: np.ndarray
    regrouped: np.ndarray
    c: np.ndarray


def tangent_norm_sq(curve, t, s):
    """Evaluate on the broadcast of ``t`` and ``s``.

    ``raw`` is ``(d + b + s b')^2 + s^2 (d + b)^2``; ``regrouped`` is
    ``(c + (1 - s)|b'|)^2 + s^2 (d + b)^2`` with ``c = d + b - |b'|``, which
    agrees with ``raw`` wherever ``b' <= 0``.
    """
    t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
    r, db = curve.radius(t), curve.profile.db(t)
    adb = np.abs(db)
    c = r - adb
    raw = (r + s * db) ** 2 + s * s * r * r
    regrouped = (c + (1.0 - s) * adb) ** 2 + s * s * r * r
    return TangentNorm(raw=raw, regrouped=regrouped, c=c)


@dataclass
class ChainReport:
    curve: str
    links: dict
    min_norm_sq: float
    min_norm_sq_at: tuple
    max_form_rel_diff: float
    max_regroup_identity_diff: float
    strict: bool
    note: str = ""
    grid_shape: tuple = ()

    @property
    def all_hold(self):
        return all(link["holds"] for link in self.links.values())

    def records(self):
        rows = []
        for name, link in self.links.items():
            rows.append({"curve": self.curve, "link": name, "holds": link["holds"],
                         "worst_margin": link["worst_margin"], "worst_t": link["worst_t"],
                         "worst_s": link["worst_s"]})
        return rows

    def summary(self):
        return {"curve": self.curve, "all_hold": self.all_hold, "strict": self.strict,
                "min_norm_sq": self.min_norm_sq, "min_norm_sq_t": self.min_norm_sq_at[0],
                "min_norm_sq_s": self.min_norm_sq_at[1],
                "max_form_rel_diff": self.max_form_rel_diff,
                "max_regroup_identity_diff": self.max_regroup_identity_diff,
                "grid_t": self.grid_shape[0], "grid_s": self.grid_shape[1], "note": self.note}


def _argmin2(a, t, s):
    i, j = np.unravel_index(int(np.argmin(a)), a.shape)
    return float(a[i, j]), float(t[i]), float(s[j])


def inequality_chain_check(curve, t_grid, s_grid, block=256):
    """Verify the three links of the tangent-line lower bound on a (t, s) grid.

    (a) ``c(t) >= d``;
    (b) ``(3/4 + (s - 1/2)^2) c |b'| + s^2 (b - |b'|)(d - |b'|) >= 0``;
    (c) ``|R_t(s)|^2 > c^2 + d^2 s^2``.

    The margin of (c) is evaluated from its cancellation-free expansion
    ``2 Q + (1 - s)^2 b'^2 + s^2 b^2`` with Q the quantity in (b).  A profile
    with ``b' == 0`` makes (c) an equality; that is reported as ``strict=False``,
    not as a failure.  Preconditions are the non-strict forms of (iii)-(v).
    """
    t = np.asarray(t_grid, dtype=float)
    s = np.asarray(s_grid, dtype=float)
    d = curve.d
    b, db = curve.profile.b(t), curve.profile.db(t)
    adb = np.abs(db)
    viol = []
    if np.any(db > 0):
        viol.append("iii (b' <= 0)")
    if np.any(b < adb):
        viol.append("iv (b >= |b'|)")
    if np.any(adb > min(1.0, d)):
        viol.append("v (|b'| <= 1)")
    if viol:
        raise ConditionsViolated("profile violates " + ", ".join(viol) + " on the t grid")

    c = d + b - adb
    a_margin = b - adb  # c - d without the cancellation
    ka = int(np.argmin(a_margin))
    links = {"a": {"holds": bool(np.all(a_margin >= 0)), "worst_margin": float(a_margin[ka]),
                   "worst_t": float(t[ka]), "worst_s": math.nan}}

    best = {"b": (math.inf, 0.0, 0.0), "c": (math.inf, 0.0, 0.0), "R": (math.inf, 0.0, 0.0)}
    ok_b = ok_c = True
    strict = True
    rel_diff = 0.0
    regroup_diff = 0.0
    S = s[None, :]
    for lo in range(0, t.size, block):
        sl = slice(lo, lo + block)
        tb, bb, ab, cb = t[sl], b[sl, None], adb[sl, None], c[sl, None]
        q = (0.75 + (S - 0.5) ** 2) * cb * ab + S * S * (bb - ab) * (d - ab)
        q_direct = (1.0 - S) * cb * ab + S * S * d * bb
        regroup_diff = max(regroup_diff, float(np.max(np.abs(q - q_direct) / (1.0 + np.abs(q_direct)))))
        margin_c = 2.0 * q + (1.0 - S) ** 2 * ab * ab + S * S * bb * bb
        tn = tangent_norm_sq(curve, tb[:, None], S)
        rel_diff = max(rel_diff, float(np.max(np.abs(tn.raw - tn.regrouped) / np.abs(tn.raw))))
        ok_b &= bool(np.all(q >= 0))
        ok_c &= bool(np.all(margin_c >= 0)) and bool(np.all(tn.raw >= cb * cb + d * d * S * S))
        strict &= bool(np.all(margin_c > 0))
        for key, arr in (("b", q), ("c", margin_c), ("R", tn.raw)):
            cand = _argmin2(arr, tb, s)
            if cand[0] < best[key][0]:
                best[key] = cand
    links["b"] = {"holds": ok_b, "worst_margin": best["b"][0], "worst_t": best["b"][1], "worst_s": best["b"][2]}
    links["c"] = {"holds": ok_c, "worst_margin": best["c"][0], "worst_t": best["c"][1], "worst_s": best["c"][2]}
    note = "" if strict else "strictness margin 0 (b' vanishes somewhere); equality case, not a failure"
    return ChainReport(curve=curve.describe(), links=links, min_norm_sq=best["R"][0],
                       min_norm_sq_at=best["R"][1:], max_form_rel_diff=rel_diff,
                       max_regroup_identity_diff=regroup_diff, strict=strict, note=note,
                       grid_shape=(t.size, s.size))


def exp_tangent_forms(t, s):
    """Two expansions of ``|R_t(s)|^2`` for ``b = e^{-t}`` (d = 1).

    Returns ``(raw, direct_excess)`` where ``raw = (1 + (1-s)e^{-t})^2 + (1+e^{-t})^2 s^2``
    and ``direct_excess = 2(3/4 + (s-1/2)^2) e^{-t} + ((1-s)^2 + s^2) e^{-2t}``,
    the amount by which it exceeds ``1 + s^2``.
    """
    t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
    e = np.exp(-t)
    raw = (1.0 + (1.0 - s) * e) ** 2 + (1.0 + e) ** 2 * s * s
    excess = 2.0 * (0.75 + (s - 0.5) ** 2) * e + ((1.0 - s) ** 2 + s * s) * e * e
    return raw, excess


# ---------------------------------------------------------------------------
# properness and weighted mean curvature


@dataclass
class PropernessTable:
    curve: str
    trap_radius: float
    T: list
    arc_length_inside: list
    slopes: list
    saturated: bool
    verdict: str

    def records(self):
        return [{"curve": self.curve, "trap_radius": self.trap_radius, "T": T,
                 "arc_length_inside": L, "incremental_slope": sl}
                for T, L, sl in zip(self.T, self.arc_length_inside, self.slopes)]


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _gauss_length(curve, lo, hi, panel=0.5):
    if hi <= lo:
        return 0.0
    k = max(1, int(math.ceil((hi - lo) / panel)))
    edges = np.linspace(lo, hi, k + 1)
    mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * np.diff(edges)
    tt = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    return float(np.sum(half[:, None] * _GL_WEIGHTS[None, :] * curve.speed(tt)))


def _inside_intervals(curve, T, trap_radius, step=0.05):
    """Sub-intervals of [0, T] where ``|Gamma(t)| <= trap_radius``."""
    k = max(2, int(math.ceil(T / step)) + 1)
    tt = np.linspace(0.0, T, k)
    g = curve.radius(tt) - trap_radius
    inside = g <= 0
    out, start = [], (0.0 if inside[0] else None)
    for i in range(1, k):
        if inside[i] != inside[i - 1]:
            root = brentq(lambda x: float(curve.radius(x)) - trap_radius, tt[i - 1], tt[i], xtol=1e-14)
            if inside[i]:
                start = root
            else:
                out.append((start, root))
                start = None
    if start is not None:
        out.append((start, T))
    return out


def properness_diagnostic(curve, T_values, trap_radius, saturation_rtol=1e-9):
    """Arc length of ``Gamma([0, T])`` inside the closed disk of radius ``trap_radius``.

    Lengths come from composite 8-point Gauss-Legendre quadrature of
    ``|Gamma'| = sqrt((d+b)^2 + b'^2)`` over the inside sub-intervals, whose
    endpoints are located by root finding.
    """
    if not trap_radius > curve.d:
        raise ValueError("trap radius must exceed the base radius d")
    Ts = [float(T) for T in T_values]
    if any(b <= a for a, b in zip(Ts, Ts[1:])):
        raise ValueError("T values must be strictly increasing")
    lengths = [sum(_gauss_length(curve, lo, hi) for lo, hi in _inside_intervals(curve, T, trap_radius))
               for T in Ts]
    slopes = [math.nan] + [(l1 - l0) / (t1 - t0) for t0, t1, l0, l1 in zip(Ts, Ts[1:], lengths, lengths[1:])]
    saturated = len(lengths) > 1 and abs(lengths[-1] - lengths[-2]) <= saturation_rtol * max(1.0, lengths[-1])
    verdict = ("bounded => consistent with proper" if saturated
               else "growing => infinite length in a compact set (non-proper)")
    return PropernessTable(curve.describe(), float(trap_radius), Ts, lengths, slopes, saturated, verdict)


@dataclass
class WeightedScan:
    curve: str
    sup_abs_weighted_h: float
    sup_abs_support: float
    sup_abs_h: float
    t_min: float
    t_max: float

    def record(self):
        return {"curve": self.curve, "t_min": self.t_min, "t_max": self.t_max,
                "sup_abs_H": self.sup_abs_h, "sup_abs_support": self.sup_abs_support,
                "sup_abs_weighted_H": self.sup_abs_weighted_h}


def curve_support(curve, t):
    """``<Gamma, N>`` with N the inward (left) unit normal."""
    p, v = curve.point(t), curve.velocity(t)
    left = np.stack([-v[..., 1], v[..., 0]], axis=-1) / np.linalg.norm(v, axis=-1, keepdims=True)
    return np.einsum("...m,...m->...", p, left)


def weighted_mean_curvature_scan(curve, t_grid):
    """Suprema of ``|H|``, ``|<X, N>|`` and ``|H + <X, N>/2|`` on the cylinder over the grid."""
    t = np.asarray(t_grid, dtype=float)
    h = spiral_curvature(curve, t)
    f = curve_support(curve, t)
    hf = h + 0.5 * f
    return WeightedScan(curve.describe(), float(np.max(np.abs(hf))), float(np.max(np.abs(f))),
                        float(np.max(np.abs(h))), float(t.min()), float(t.max()))


# ---------------------------------------------------------------------------
# canonical shrinkers


def canonical_shrinker(p, n=2, cap="north"):
    """``S^p(sqrt(2p)) x R^(n-p)`` as an analytic builder (inward normal for p >= 1).

    ``n`` is 1 (curves in R^2) or 2 (surfaces in R^3).  The sphere is returned
    as one stereographic cap; pass ``cap="south"`` for the other half.
    """
    if n not in (1, 2) or not 0 <= p <= n:
        raise BadDimension(f"need n in (1, 2) and 0 <= p <= n, got p={p}, n={n}")
    radius = math.sqrt(2 * p)
    if p == 0:
        return Plane(d=0.0) if n == 2 else Line(d=0.0)
    if n == 1:
        return Circle(r=radius)
    if p == 1:
        return Cylinder(r=radius)
    return Sphere(r=radius, cap=cap)


def canonical_atlas(p, n=2):
    """Every chart needed to cover the canonical shrinker."""
    spec = canonical_shrinker(p, n)
    if isinstance(spec, Sphere):
        return [spec, canonical_shrinker(p, n, cap="south")]
    return [spec]


def exp_bound_check(t_grid, s_grid):
    """Termwise check of ``|R_t(s)|^2 - (1 + s^2) > 0`` for ``b = e^{-t}``, valid for every t."""
    t = np.asarray(t_grid, dtype=float)[:, None]
    s = np.asarray(s_grid, dtype=float)[None, :]
    raw, excess = exp_tangent_forms(t, s)
    term1 = 2.0 * (0.75 + (s - 0.5) ** 2) * np.exp(-t)
    term2 = ((1.0 - s) ** 2 + s * s) * np.exp(-2.0 * t)
    lhs = raw - (1.0 + s * s)
    scale = np.maximum(1.0, np.abs(raw))
    return {
        "terms_positive": bool(np.all(term1 > 0) and np.all(term2 > 0)),
        "min_excess": float(np.min(excess)),
        "max_rel_diff": float(np.max(np.abs(lhs - excess) / scale)),
        "min_norm_sq": float(np.min(raw)),
        "R00": float(exp_tangent_forms(0.0, 0.0)[0]),
    }
