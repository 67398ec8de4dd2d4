"""Tangent affine subspaces, pointwise omission certificates and coverage rasters.

In codimension one the distance from a point to a tangent plane is the size
of its normal component, so a raster cell's distance to a plane is
``|<q, N> - <X, N>|``.  For vertical cylinders over a planar curve every
tangent plane is vertical, and rasters are computed in the plane over the
curve's tangent lines.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from solitongeom.errors import EmptySample
from solitongeom.surface import eval_jet, frame_at, support_based

_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class AffineTangent:
    """``base + span(basis)`` with unit ``normal``; ``basis`` rows are orthonormal."""

    base: np.ndarray
    basis: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        basis = np.atleast_2d(np.asarray(self.basis, dtype=float))
        normal = np.asarray(self.normal, dtype=float)
        object.__setattr__(self, "base", np.asarray(self.base, dtype=float))
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "normal", normal)
        gram = basis @ basis.T
        if np.max(np.abs(gram - np.eye(len(basis)))) > 1e-10:
            raise ValueError("tangent basis is not orthonormal")
        if abs(np.linalg.norm(normal) - 1.0) > 1e-10 or np.max(np.abs(basis @ normal)) > 1e-10:
            raise ValueError("normal must be a unit vector orthogonal to the basis")


def tangent_at(spec, u):
    """The tangent affine subspace of ``spec`` at one parameter point."""
    jet = eval_jet(spec, np.asarray(u, dtype=float))
    frame = frame_at(jet, spec.orientation, spec._inward_for(jet, u))
    q, _ = np.linalg.qr(jet.dx.T)
    return AffineTangent(base=jet.x, basis=q.T, normal=frame.normal)


def point_plane_distance(q, plane):
    q = np.asarray(q, dtype=float)
    return np.abs(np.einsum("...m,m->...", q - plane.base, plane.normal))


def project_onto_tangent(q, plane):
    q = np.asarray(q, dtype=float)
    offset = np.einsum("...m,m->...", q - plane.base, plane.normal)
    return q - offset[..., None] * plane.normal


def sample_spacing(params):
    """Largest gap between consecutive distinct values along each parameter axis."""
    params = np.asarray(params, dtype=float).reshape(-1, np.shape(params)[-1])
    out = []
    for axis in range(params.shape[1]):
        vals = np.unique(params[:, axis])
        out.append(float(np.max(np.diff(vals))) if vals.size > 1 else 0.0)
    return tuple(out)


@dataclass
class OmissionCertificate:
    surface: str
    p0: tuple
    min_support: float
    min_plane_distance: float
    all_nonzero: bool
    cert_tol: float
    n_samples: int
    sample_spacing: tuple
    argmin_param: tuple

    def record(self):
        return {"surface": self.surface, "p0": " ".join(repr(v) for v in self.p0),
                "min_support": self.min_support, "min_plane_distance": self.min_plane_distance,
                "all_nonzero": self.all_nonzero, "cert_tol": self.cert_tol,
                "n_samples": self.n_samples,
                "sample_spacing": " ".join(repr(v) for v in self.sample_spacing),
                "argmin_param": " ".join(repr(v) for v in self.argmin_param),
                "claim": "sampled parameters only; not a proof of omission"}


def omission_certificate(spec, params, p0, cert_tol=None):
    """Smallest ``|<p - p0, N(p)>|`` over sampled parameters.

    ``all_nonzero`` says p0 lies off every *sampled* tangent plane; nothing is
    claimed between samples.  The default tolerance is ``1e-6`` times the
    largest ``|X - p0|`` seen.
    """
    params = np.asarray(params, dtype=float).reshape(-1, spec.n)
    if params.shape[0] == 0:
        raise EmptySample("no parameter samples")
    p0 = np.asarray(p0, dtype=float)
    fr = spec.frame(params)
    support = np.abs(support_based(fr, p0))
    # foot of the perpendicular from p0 to each tangent plane
    foot = p0 + np.einsum("...m,...m->...", fr.x - p0, fr.normal)[..., None] * fr.normal
    plane_dist = np.linalg.norm(foot - p0, axis=-1)
    if cert_tol is None:
        cert_tol = 1e-6 * float(np.max(np.linalg.norm(fr.x - p0, axis=-1)))
    k = int(np.argmin(support))
    return OmissionCertificate(spec.describe(), tuple(float(v) for v in p0), float(support[k]),
                               float(np.min(plane_dist)), bool(support[k] > cert_tol), float(cert_tol),
                               int(params.shape[0]), sample_spacing(params), tuple(float(v) for v in params[k]))


@dataclass
class CoverageRaster:
    """Per-cell minimum distance from cell centres to the sampled tangent planes."""

    box: tuple
    cells: tuple
    min_dist: np.ndarray
    cover_tol: float
    n_planes: int
    sample_spacing: tuple
    surface: str = ""
    reduced_2d: bool = False

    @property
    def covered(self):
        return self.min_dist <= self.cover_tol

    @property
    def cell_size(self):
        return tuple((hi - lo) / c for (lo, hi), c in zip(self.box, self.cells))

    @property
    def cell_diagonal(self):
        return math.hypot(*self.cell_size) if len(self.cells) == 2 else math.sqrt(sum(h * h for h in self.cell_size))

    def axes(self):
        return [lo + (np.arange(c) + 0.5) * (hi - lo) / c for (lo, hi), c in zip(self.box, self.cells)]

    def centers(self):
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def radius(self):
        """Distance of each cell centre from the axis (2-D) or origin (3-D)."""
        return np.linalg.norm(self.centers(), axis=-1)

    def covered_fraction(self, mask):
        sel = self.covered[mask]
        return float(np.mean(sel)) if sel.size else math.nan

    def records(self):
        c = self.centers().reshape(-1, len(self.cells))
        d = self.min_dist.reshape(-1)
        cov = self.covered.reshape(-1)
        names = ("x", "y", "z")[:len(self.cells)]
        for i in range(d.size):
            row = {name: float(c[i, k]) for k, name in enumerate(names)}
            row["min_dist"] = float(d[i])
            row["covered"] = bool(cov[i])
            yield row


def _plane_data(spec, params):
    fr = spec.frame(params)
    return fr.normal, np.einsum("...m,...m->...", fr.x, fr.normal)


def _segment_min(centers, base, vel, normals, s_range):
    """Min over segments ``base + s vel`` (s in s_range) of the distance to each centre.

    Uses ``|q - base - s vel|^2 = line_dist^2 + |vel|^2 (s - s*)^2`` with s*
    the foot parameter, so everything stays a matrix product.
    """
    s0, s1 = s_range
    vv = np.einsum("pm,pm->p", vel, vel)
    line = centers @ normals.T - np.einsum("pm,pm->p", base, normals)
    foot = (centers @ vel.T - np.einsum("pm,pm->p", base, vel)) / vv
    overshoot = foot - np.clip(foot, s0, s1)
    return np.sqrt(np.min(line * line + vv * overshoot * overshoot, axis=1))


def coverage_raster(spec, params, box, cells, cover_tol=None, s_range=None, workers=1):
    """Rasterize the union of sampled tangent planes over an axis-aligned box.

    ``box`` has one interval per spatial axis; a 2-D box over a vertical
    cylinder (or an n = 1 curve in the plane) uses tangent lines of the
    profile curve.  ``cover_tol`` defaults to 1.5 cell diagonals.
    ``s_range`` clips each tangent line to ``Gamma(t) + s Gamma'(t)``,
    ``s`` in the range; it is only meaningful for planar curves.
    """
    params = np.asarray(params, dtype=float).reshape(-1, spec.n)
    if params.shape[0] == 0:
        raise EmptySample("no parameter samples")
    box = tuple((float(lo), float(hi)) for lo, hi in box)
    cells = (int(cells),) * len(box) if np.isscalar(cells) else tuple(int(c) for c in cells)
    if len(cells) != len(box) or any(c < 1 for c in cells):
        raise ValueError("one positive cell count per box axis")

    target = spec
    plane_params = params
    reduced = False
    if len(box) == 2 and spec.ambient_dim == 3:
        if not spec.vertical:
            raise ValueError("2-D rasters need a vertical cylinder or a planar curve")
        target = spec.profile_curve()
        plane_params = np.unique(params[:, :1], axis=0)
        reduced = True
    elif len(box) != target.ambient_dim:
        raise ValueError("box dimension must match the ambient dimension")
    if s_range is not None and target.n != 1:
        raise ValueError("s_range clipping applies to tangent lines of planar curves only")

    raster = CoverageRaster(box=box, cells=cells, min_dist=np.empty(cells), cover_tol=0.0,
                            n_planes=int(plane_params.shape[0]), sample_spacing=sample_spacing(params),
                            surface=spec.describe(), reduced_2d=reduced)
    raster.cover_tol = 1.5 * raster.cell_diagonal if cover_tol is None else float(cover_tol)
    centers = raster.centers().reshape(-1, len(box))

    if s_range is None:
        normals, offsets = _plane_data(target, plane_params)

        def block(sl):
            return np.min(np.abs(centers @ normals[sl].T - offsets[sl]), axis=1)
    else:
        jet = eval_jet(target, plane_params)
        base, vel = jet.x, jet.dx[:, 0, :]
        normals = _plane_data(target, plane_params)[0]

        def block(sl):
            return _segment_min(centers, base[sl], vel[sl], normals[sl], s_range)

    step = max(1, _CHUNK_ELEMENTS // (centers.shape[0] * (1 if s_range is None else 3)))
    slices = [slice(i, i + step) for i in range(0, plane_params.shape[0], step)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(block, slices))
    else:
        parts = [block(sl) for sl in slices]
    # min is exact and order-independent, so the result does not depend on workers
    raster.min_dist = np.min(np.stack(parts), axis=0).reshape(cells)
    return raster
