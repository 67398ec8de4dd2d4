"""Parametric hypersurfaces of Euclidean space and their pointwise codimension-one geometry.

Everything here is vectorized: a jet or frame may carry any leading batch
shape (a single point, a list of points, or a whole parameter grid).
Second partials are stored once per unordered index pair, ordered
``(0,0), (0,1), (1,1)`` for surfaces and ``(0,0)`` for curves.

Sign conventions: ``h_ij = <d_ij X, N>``, ``A = g^-1 h``, ``H = tr A`` (no
division by n) and ``f = <X, N>``.  A round sphere with the inward normal
therefore has ``H > 0`` and ``f < 0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from solitongeom.errors import DegenerateJet, OutOfDomain

ORIENTATIONS = ("inward", "outward", "as-computed")
JET_RANK_RTOL = 1e-8


def pair_indices(n):
    """Unordered index pairs in storage order."""
    return [(i, j) for i in range(n) for j in range(i, n)]


@dataclass(frozen=True)
class ParamGrid:
    """Uniform tensor grid over a box of parameter values (closed intervals)."""

    ranges: tuple
    counts: tuple

    def __post_init__(self):
        ranges = tuple((float(lo), float(hi)) for lo, hi in self.ranges)
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, "ranges", ranges)
        object.__setattr__(self, "counts", counts)
        if len(ranges) not in (1, 2) or len(counts) != len(ranges):
            raise ValueError("ParamGrid supports 1 or 2 axes with one count per axis")
        for (lo, hi), c in zip(ranges, counts):
            if not (np.isfinite(lo) and np.isfinite(hi) and hi > lo):
                raise ValueError(f"bad parameter interval [{lo}, {hi}]")
            if c < 5:
                raise ValueError("every axis needs at least 5 samples")

    @property
    def dim_n(self):
        return len(self.counts)

    @property
    def spacing(self):
        return tuple((hi - lo) / (c - 1) for (lo, hi), c in zip(self.ranges, self.counts))

    @property
    def shape(self):
        return self.counts

    def axes(self):
        return [np.linspace(lo, hi, c) for (lo, hi), c in zip(self.ranges, self.counts)]

    def nodes(self):
        """Array of shape ``(*counts, n)`` holding every grid node."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1)

    def refined(self):
        """Same box with every spacing halved."""
        return ParamGrid(self.ranges, tuple(2 * c - 1 for c in self.counts))

    def interior_mask(self, width=1):
        mask = np.zeros(self.counts, dtype=bool)
        mask[tuple(slice(width, c - width) for c in self.counts)] = True
        return mask


@dataclass(frozen=True)
class ImmersionJet:
    """Position, first partials and distinct second partials of an immersion.

    Shapes: ``x`` is ``(..., m)``, ``dx`` is ``(..., n, m)`` (row i is the
    i-th partial) and ``ddx`` is ``(..., n(n+1)/2, m)``.
    """

    x: np.ndarray
    dx: np.ndarray
    ddx: np.ndarray

    @property
    def n(self):
        return self.dx.shape[-2]

    @property
    def ambient_dim(self):
        return self.x.shape[-1]

    @property
    def batch_shape(self):
        return self.x.shape[:-1]

    def gram(self):
        return np.einsum("...ik,...jk->...ij", self.dx, self.dx)

    def second_partials(self):
        """Full symmetric array ``(..., n, n, m)`` of second partials."""
        n = self.n
        full = np.empty(self.batch_shape + (n, n, self.ambient_dim))
        for p, (i, j) in enumerate(pair_indices(n)):
            full[..., i, j, :] = self.ddx[..., p, :]
            full[..., j, i, :] = self.ddx[..., p, :]
        return full

    def rank_defect(self):
        """Boolean mask of points failing the relative Gram-determinant test."""
        scale = np.max(np.linalg.norm(self.dx, axis=-1), axis=-1)
        det = np.linalg.det(self.gram())
        return ~(det > JET_RANK_RTOL * scale ** (2 * self.n))

    def __getitem__(self, index):
        return ImmersionJet(self.x[index], self.dx[index], self.ddx[index])


@dataclass(frozen=True)
class GeomFrame:
    """Codimension-one package at one or many points.

    ``christoffel[..., k, i, j]`` holds the Christoffel symbols of the
    induced metric, obtained from the tangential part of the second partials.
    """

    x: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    normal: np.ndarray
    h: np.ndarray
    shape: np.ndarray
    mean_h: np.ndarray
    norm_a_sq: np.ndarray
    f: np.ndarray
    x_tan: np.ndarray
    christoffel: np.ndarray

    @property
    def n(self):
        return self.g.shape[-1]

    def __getitem__(self, index):
        return GeomFrame(**{name: getattr(self, name)[index] for name in _FRAME_FIELDS})

    def reconstruct(self, jet):
        """Rebuild the position as ``sum_i x_tan^i dx_i + f N``."""
        return np.einsum("...i,...im->...m", self.x_tan, jet.dx) + self.f[..., None] * self.normal


_FRAME_FIELDS = ("x", "g", "g_inv", "normal", "h", "shape", "mean_h",
                 "norm_a_sq", "f", "x_tan", "christoffel")


def _raw_normal(dx):
    n, m = dx.shape[-2:]
    if (n, m) == (2, 3):
        nrm = np.cross(dx[..., 0, :], dx[..., 1, :])
    elif (n, m) == (1, 2):
        t = dx[..., 0, :]
        nrm = np.stack([-t[..., 1], t[..., 0]], axis=-1)
    else:
        raise ValueError(f"only codimension one with n in (1, 2) is supported, got n={n}, m={m}")
    return nrm / np.linalg.norm(nrm, axis=-1, keepdims=True)


def frame_at(jet, orientation="as-computed", inward=None):
    """Derive the :class:`GeomFrame` of a jet.

    ``inward`` is a reference direction (same batch shape as the jet) that the
    inward normal must have positive inner product with; it is required for
    the ``inward`` and ``outward`` orientations.
    """
    if orientation not in ORIENTATIONS:
        raise ValueError(f"orientation must be one of {ORIENTATIONS}")
    bad = jet.rank_defect()
    if np.any(bad):
        raise DegenerateJet(f"{int(np.count_nonzero(bad))} point(s) have a degenerate Gram matrix")

    x = np.asarray(jet.x, dtype=float)
    g = jet.gram()
    g_inv = np.linalg.inv(g)
    normal = _raw_normal(jet.dx)
    if orientation != "as-computed":
        if inward is None:
            raise ValueError(f"orientation {orientation!r} needs an inward reference direction")
        sign = np.where(np.einsum("...m,...m->...", normal, inward) < 0.0, -1.0, 1.0)
        if orientation == "outward":
            sign = -sign
        normal = normal * sign[..., None]

    d2 = jet.second_partials()
    h = np.einsum("...ijm,...m->...ij", d2, normal)
    shape = g_inv @ h
    mean_h = np.trace(shape, axis1=-2, axis2=-1)
    norm_a_sq = np.einsum("...ij,...ji->...", shape, shape)
    f = np.einsum("...m,...m->...", x, normal)
    x_tan = np.einsum("...ij,...j->...i", g_inv,
                      np.einsum("...jm,...m->...j", jet.dx, x))
    first_kind = np.einsum("...ijm,...lm->...lij", d2, jet.dx)
    christoffel = np.einsum("...kl,...lij->...kij", g_inv, first_kind)
    return GeomFrame(x=x, g=g, g_inv=g_inv, normal=normal, h=h, shape=shape,
                     mean_h=mean_h, norm_a_sq=norm_a_sq, f=f, x_tan=x_tan,
                     christoffel=christoffel)


def support_based(frame, p0):
    """Support function relative to a base point, ``<x - p0, N>``."""
    p0 = np.asarray(p0, dtype=float)
    return np.einsum("...m,...m->...", frame.x - p0, frame.normal)


class SurfaceSpec:
    """Base class for hypersurface builders.

    Subclasses implement :meth:`_jet` (exact, vectorized over ``u[..., n]``)
    and :meth:`inward_direction`.  ``domain`` lists the closed parameter
    intervals on which the chart is valid; ``default_ranges`` is the box used
    when a caller does not specify one.
    """

    kind: ClassVar[str] = "abstract"
    n: ClassVar[int] = 2
    ambient_dim: ClassVar[int] = 3
    vertical: ClassVar[bool] = False

    @property
    def domain(self):
        return ((-np.inf, np.inf),) * self.n

    @property
    def default_ranges(self):
        raise NotImplementedError

    def _jet(self, u):
        raise NotImplementedError

    def inward_direction(self, x, u):
        raise NotImplementedError

    def params(self):
        return {}

    def describe(self):
        items = ",".join(f"{k}={v}" for k, v in self.params().items())
        return f"{self.kind}:{items}" if items else self.kind

    def eval(self, u):
        return eval_jet(self, u)

    def frame(self, u):
        jet = eval_jet(self, u)
        return frame_at(jet, self.orientation, self._inward_for(jet, u))

    def sample(self, grid):
        """Jets and frames on every node of ``grid``."""
        u = grid.nodes()
        jet = eval_jet(self, u)
        return jet, frame_at(jet, self.orientation, self._inward_for(jet, u))

    def _inward_for(self, jet, u):
        if self.orientation == "as-computed":
            return None
        return self.inward_direction(jet.x, np.asarray(u, dtype=float))


def eval_jet(spec, u):
    """Evaluate the exact jet of ``spec`` at parameter point(s) ``u``."""
    u = np.asarray(u, dtype=float)
    if u.shape[-1:] != (spec.n,):
        raise ValueError(f"parameter points must have trailing dimension {spec.n}")
    for axis, (lo, hi) in enumerate(spec.domain):
        tol = 1e-12 * max(1.0, abs(lo) if np.isfinite(lo) else 1.0, abs(hi) if np.isfinite(hi) else 1.0)
        ua = u[..., axis]
        if np.any(ua < lo - tol) or np.any(ua > hi + tol) or not np.all(np.isfinite(ua)):
            raise OutOfDomain(f"parameter axis {axis} leaves [{lo}, {hi}] for {spec.describe()}")
    x, dx, ddx = spec._jet(u)
    jet = ImmersionJet(x, dx, ddx)
    bad = jet.rank_defect()
    if np.any(bad):
        raise DegenerateJet(f"{spec.describe()}: Gram determinant below tolerance "
                            f"at {int(np.count_nonzero(bad))} point(s)")
    return jet


def _stack_jet(xs, dxs, ddxs):
    """Assemble component lists into jet arrays.

    ``xs`` is a list over ambient components; ``dxs[i]`` and ``ddxs[p]`` are
    lists over ambient components for partial i / pair p.
    """
    x = np.stack(xs, axis=-1)
    dx = np.stack([np.stack(row, axis=-1) for row in dxs], axis=-2)
    ddx = np.stack([np.stack(row, axis=-1) for row in ddxs], axis=-2)
    return x, dx, ddx


def _check_orientation(orientation):
    if orientation not in ORIENTATIONS:
        raise ValueError(f"orientation must be one of {ORIENTATIONS}")


# --------------------------------------------------------------------------
# analytic builders


def _stereo_unit(u, sign):
    """Unit sphere via stereographic projection from the opposite pole.

    The disk ``|u| <= 1`` maps onto the hemisphere with ``sign * z >= 0``.
    """
    a, b = u[..., 0], u[..., 1]
    D = 1.0 + a * a + b * b
    phi = 1.0 / D
    pa, pb = -2.0 * a / D**2, -2.0 * b / D**2
    paa = -2.0 / D**2 + 8.0 * a * a / D**3
    pab = 8.0 * a * b / D**3
    pbb = -2.0 / D**2 + 8.0 * b * b / D**3

    X, Y, Z = 2 * a * phi, 2 * b * phi, sign * (2 * phi - 1.0)
    Xa, Xb = 2 * phi + 2 * a * pa, 2 * a * pb
    Ya, Yb = 2 * b * pa, 2 * phi + 2 * b * pb
    Za, Zb = sign * 2 * pa, sign * 2 * pb
    Xaa, Xab, Xbb = 4 * pa + 2 * a * paa, 2 * pb + 2 * a * pab, 2 * a * pbb
    Yaa, Yab, Ybb = 2 * b * paa, 2 * pa + 2 * b * pab, 4 * pb + 2 * b * pbb
    Zaa, Zab, Zbb = sign * 2 * paa, sign * 2 * pab, sign * 2 * pbb
    return _stack_jet([X, Y, Z],
                      [[Xa, Ya, Za], [Xb, Yb, Zb]],
                      [[Xaa, Yaa, Zaa], [Xab, Yab, Zab], [Xbb, Ybb, Zbb]])


@dataclass(frozen=True)
class Ellipsoid(SurfaceSpec):
    """Ellipsoid with semi-axes (a, b, c), charted by two stereographic caps.

    ``cap="north"`` covers ``z >= 0`` for ``|u| <= 1``; ``cap="south"`` the
    other half.  Inward means toward the centre, giving ``f < 0``.
    """

    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    cap: str = "north"
    orientation: str = "inward"
    kind: ClassVar[str] = "ellipsoid"

    def __post_init__(self):
        if min(self.a, self.b, self.c) <= 0:
            raise ValueError("semi-axes must be positive")
        if self.cap not in ("north", "south"):
            raise ValueError("cap must be 'north' or 'south'")
        _check_orientation(self.orientation)

    @property
    def domain(self):
        return ((-1.0, 1.0), (-1.0, 1.0))

    @property
    def default_ranges(self):
        return ((-0.5, 0.5), (-0.5, 0.5))

    def _jet(self, u):
        x, dx, ddx = _stereo_unit(u, 1.0 if self.cap == "north" else -1.0)
        scale = np.array([self.a, self.b, self.c])
        return x * scale, dx * scale, ddx * scale

    def inward_direction(self, x, u):
        return -x

    def params(self):
        return {"a": self.a, "b": self.b, "c": self.c, "cap": self.cap}


@dataclass(frozen=True)
class Sphere(Ellipsoid):
    """Round sphere of radius r centred at the origin (two stereographic caps)."""

    r: float = 1.0
    kind: ClassVar[str] = "sphere"

    def __init__(self, r=1.0, cap="north", orientation="inward"):
        object.__setattr__(self, "r", float(r))
        super().__init__(a=float(r), b=float(r), c=float(r), cap=cap, orientation=orientation)

    def params(self):
        return {"r": self.r, "cap": self.cap}


def _plane_basis(normal):
    nrm = np.asarray(normal, dtype=float)
    nrm = nrm / np.linalg.norm(nrm)
    helper = np.eye(3)[int(np.argmin(np.abs(nrm)))]
    e1 = helper - np.dot(helper, nrm) * nrm
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(nrm, e1)
    return nrm, e1, e2


@dataclass(frozen=True)
class Plane(SurfaceSpec):
    """Affine plane ``{d*n + u e1 + v e2}`` with ``e1 x e2 = n``.

    For ``n = (0, 0, 1)`` the chart is the identity ``(u, v) -> (u, v, d)``.
    Inward points toward the origin; through the origin it falls back to ``n``.
    """

    d: float = 0.0
    normal: tuple = (0.0, 0.0, 1.0)
    orientation: str = "as-computed"
    kind: ClassVar[str] = "plane"

    def __post_init__(self):
        object.__setattr__(self, "normal", tuple(float(v) for v in self.normal))
        if len(self.normal) != 3 or np.linalg.norm(self.normal) == 0:
            raise ValueError("plane normal must be a nonzero 3-vector")
        _check_orientation(self.orientation)

    @property
    def default_ranges(self):
        return ((-1.0, 1.0), (-1.0, 1.0))

    def _basis(self):
        if self.normal == (0.0, 0.0, 1.0):
            return np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
        return _plane_basis(self.normal)

    def _jet(self, u):
        nrm, e1, e2 = self._basis()
        batch = u.shape[:-1]
        x = self.d * nrm + u[..., 0:1] * e1 + u[..., 1:2] * e2
        dx = np.broadcast_to(np.stack([e1, e2]), batch + (2, 3)).copy()
        ddx = np.zeros(batch + (3, 3))
        return x, dx, ddx

    def inward_direction(self, x, u):
        nrm = self._basis()[0]
        sign = -1.0 if self.d > 0 else 1.0
        return np.broadcast_to(sign * nrm, x.shape)

    def params(self):
        out = {"d": self.d}
        if self.normal != (0.0, 0.0, 1.0):
            out["normal"] = self.normal
        return out


@dataclass(frozen=True)
class Cylinder(SurfaceSpec):
    """Round cylinder ``S^1(r) x R``: ``(theta, z) -> (r cos, r sin, z)``."""

    r: float = 1.0
    orientation: str = "inward"
    kind: ClassVar[str] = "cylinder"
    vertical: ClassVar[bool] = True

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError("radius must be positive")
        _check_orientation(self.orientation)

    @property
    def default_ranges(self):
        return ((0.0, 2 * np.pi), (-1.0, 1.0))

    def _jet(self, u):
        t = u[..., 0]
        c, s, z0, one = np.cos(t), np.sin(t), np.zeros_like(t), np.ones_like(t)
        r = self.r
        return _stack_jet([r * c, r * s, u[..., 1]],
                          [[-r * s, r * c, z0], [z0, z0, one]],
                          [[-r * c, -r * s, z0], [z0, z0, z0], [z0, z0, z0]])

    def inward_direction(self, x, u):
        out = -np.array(x, dtype=float)
        out[..., 2] = 0.0
        return out

    def profile_curve(self):
        return Circle(r=self.r, orientation=self.orientation)

    def params(self):
        return {"r": self.r}


@dataclass(frozen=True)
class Torus(SurfaceSpec):
    """Torus of revolution with centre-circle radius R and tube radius r."""

    R: float = 2.0
    r: float = 0.5
    orientation: str = "inward"
    kind: ClassVar[str] = "torus"

    def __post_init__(self):
        if not (self.R > self.r > 0):
            raise ValueError("torus needs R > r > 0")
        _check_orientation(self.orientation)

    @property
    def default_ranges(self):
        return ((0.0, 2 * np.pi), (0.0, 2 * np.pi))

    def _jet(self, u):
        p, q = u[..., 0], u[..., 1]
        cp, sp, cq, sq = np.cos(p), np.sin(p), np.cos(q), np.sin(q)
        rho = self.R + self.r * cq
        r = self.r
        z0 = np.zeros_like(p)
        return _stack_jet(
            [rho * cp, rho * sp, r * sq],
            [[-rho * sp, rho * cp, z0], [-r * sq * cp, -r * sq * sp, r * cq]],
            [[-rho * cp, -rho * sp, z0],
             [r * sq * sp, -r * sq * cp, z0],
             [-r * cq * cp, -r * cq * sp, -r * sq]])

    def inward_direction(self, x, u):
        p = u[..., 0]
        core = np.stack([self.R * np.cos(p), self.R * np.sin(p), np.zeros_like(p)], axis=-1)
        return core - x

    def params(self):
        return {"R": self.R, "r": self.r}


@dataclass(frozen=True)
class Circle(SurfaceSpec):
    """Circle of radius r in the plane (a curve, n = 1)."""

    r: float = 1.0
    orientation: str = "inward"
    kind: ClassVar[str] = "circle"
    n: ClassVar[int] = 1
    ambient_dim: ClassVar[int] = 2

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError("radius must be positive")
        _check_orientation(self.orientation)

    @property
    def default_ranges(self):
        return ((0.0, 2 * np.pi),)

    def _jet(self, u):
        t = u[..., 0]
        c, s = np.cos(t), np.sin(t)
        r = self.r
        return _stack_jet([r * c, r * s], [[-r * s, r * c]], [[-r * c, -r * s]])

    def inward_direction(self, x, u):
        return -np.asarray(x, dtype=float)

    def params(self):
        return {"r": self.r}


@dataclass(frozen=True)
class Line(SurfaceSpec):
    """Straight line ``{d*n + t e}`` in the plane, with ``rot90(e) = n``."""

    d: float = 0.0
    normal: tuple = (0.0, 1.0)
    orientation: str = "as-computed"
    kind: ClassVar[str] = "line"
    n: ClassVar[int] = 1
    ambient_dim: ClassVar[int] = 2

    def __post_init__(self):
        nrm = np.asarray(self.normal, dtype=float)
        if nrm.shape != (2,) or np.linalg.norm(nrm) == 0:
            raise ValueError("line normal must be a nonzero 2-vector")
        object.__setattr__(self, "normal", tuple(float(v) for v in nrm / np.linalg.norm(nrm)))
        _check_orientation(self.orientation)

    @property
    def default_ranges(self):
        return ((-1.0, 1.0),)

    def _jet(self, u):
        nrm = np.array(self.normal)
        e = np.array([nrm[1], -nrm[0]])
        batch = u.shape[:-1]
        x = self.d * nrm + u[..., 0:1] * e
        dx = np.broadcast_to(e, batch + (1, 2)).copy()
        return x, dx, np.zeros(batch + (1, 2))

    def inward_direction(self, x, u):
        sign = -1.0 if self.d > 0 else 1.0
        return np.broadcast_to(sign * np.array(self.normal), np.shape(x))

    def params(self):
        return {"d": self.d}


@dataclass(frozen=True)
class TabulatedSurface(SurfaceSpec):
    """Jets stored on the nodes of a :class:`ParamGrid`.

    Evaluation is only defined at grid nodes; anything else is out of domain.
    """

    grid: ParamGrid = None
    x: np.ndarray = None
    dx: np.ndarray = None
    ddx: np.ndarray = None
    inward: np.ndarray = None
    orientation: str = "as-computed"
    kind: ClassVar[str] = "tabulated"

    def __post_init__(self):
        if self.grid is None:
            raise ValueError("tabulated surface needs a grid")
        shape = self.grid.counts
        if self.x.shape[:-1] != shape or self.dx.shape[:-2] != shape or self.ddx.shape[:-2] != shape:
            raise ValueError("tabulated jets must be laid out on the grid")
        _check_orientation(self.orientation)
        if self.orientation != "as-computed" and self.inward is None:
            raise ValueError("inward/outward orientation needs tabulated inward directions")

    @property
    def n(self):
        return self.grid.dim_n

    @property
    def ambient_dim(self):
        return self.x.shape[-1]

    @property
    def domain(self):
        return self.grid.ranges

    @property
    def default_ranges(self):
        return self.grid.ranges

    def _index(self, u):
        idx = []
        for axis, ((lo, _), h, c) in enumerate(zip(self.grid.ranges, self.grid.spacing, self.grid.counts)):
            pos = (u[..., axis] - lo) / h
            k = np.rint(pos)
            if np.any(np.abs(pos - k) > 1e-9) or np.any(k < 0) or np.any(k > c - 1):
                raise OutOfDomain("tabulated surfaces are only defined at grid nodes")
            idx.append(k.astype(int))
        return tuple(idx)

    def _jet(self, u):
        idx = self._index(u)
        return self.x[idx], self.dx[idx], self.ddx[idx]

    def inward_direction(self, x, u):
        return self.inward[self._index(u)]

    def describe(self):
        return f"tabulated:{'x'.join(str(c) for c in self.grid.counts)}"


def tabulate(spec, grid):
    """Freeze an analytic builder into a :class:`TabulatedSurface` on ``grid``."""
    u = grid.nodes()
    jet = eval_jet(spec, u)
    inward = None if spec.orientation == "as-computed" else spec.inward_direction(jet.x, u)
    return TabulatedSurface(grid=grid, x=jet.x, dx=jet.dx, ddx=jet.ddx,
                            inward=inward, orientation=spec.orientation)
